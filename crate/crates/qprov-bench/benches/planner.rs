use criterion::{black_box, criterion_group, criterion_main, Criterion};
use qprov::benders::{run_decomposed, BendersConfig};
use qprov::model::{solve_mode, ModelMode};
use qprov::purify::{min_pairs_for_target, purify_chain};
use qprov::solver::{solve_lp, solve_milp, LinearProgram, Sense, VarKind, DEFAULT_GAP};
use qprov_bench::bench_instance;

fn purification(c: &mut Criterion) {
    c.bench_function("purify_chain_0.55_x60", |b| {
        b.iter(|| purify_chain(black_box(0.55), black_box(60)).unwrap())
    });
    c.bench_function("min_pairs_0.55_to_0.80", |b| {
        b.iter(|| min_pairs_for_target(black_box(0.55), black_box(0.80), 60).unwrap())
    });
}

/// A dense-ish integer covering program, solved from scratch every pass.
fn covering_program() -> LinearProgram {
    let mut p = LinearProgram::new();
    let vars: Vec<_> = (0..30)
        .map(|j| {
            let v = p.add_var(format!("x{j}"), VarKind::Integer, 0.0, 10.0).unwrap();
            p.set_objective_coef(v, 1.0 + (j % 7) as f64);
            v
        })
        .collect();
    for i in 0..20 {
        let terms: Vec<_> = vars
            .iter()
            .enumerate()
            .filter(|(j, _)| (i + j) % 3 != 0)
            .map(|(j, &v)| (v, 1.0 + ((i * j) % 5) as f64))
            .collect();
        p.add_constraint(format!("c{i}"), &terms, Sense::Ge, 25.0).unwrap();
    }
    p
}

fn lp_engine(c: &mut Criterion) {
    let p = covering_program();
    c.bench_function("simplex_30x20", |b| b.iter(|| solve_lp(black_box(&p)).unwrap()));
    c.bench_function("branch_and_bound_30x20", |b| {
        b.iter(|| solve_milp(black_box(&p), DEFAULT_GAP).unwrap())
    });
}

fn planner(c: &mut Criterion) {
    let (instance, space) = bench_instance();
    c.bench_function("direct_solve_three_node", |b| {
        b.iter(|| solve_mode(&instance, &space, ModelMode::Stochastic).unwrap())
    });
    c.bench_function("benders_three_node", |b| {
        b.iter(|| run_decomposed(&instance, &space, &BendersConfig::default()).unwrap())
    });
}

criterion_group!(benches, purification, lp_engine, planner);
criterion_main!(benches);
