mod common;

use common::{three_node_path, two_fidelity_scenarios};
use qprov::domain::{build_scenario_space, evaluate_cost, DemandSets, PlanSolution};
use qprov::model::{build_model, evaluate_first_stage_against, solve_mode, ModelError, ModelMode};

#[test]
fn tiny_model_has_nineteen_decision_variables() {
    let inst = three_node_path();
    let space = two_fidelity_scenarios(&inst);
    let model = build_model(&inst, &space, ModelMode::Stochastic).unwrap();
    // w:2, yrep:2, yeep:4, yoep:4, xrqt:1, xuqt:2, xoqt:2, yowt:2
    assert_eq!(model.vars.decision_count(), 19);
    // The machine-assignment flag is the only formulation auxiliary here.
    assert_eq!(model.vars.auxiliary_count(), 1);
}

#[test]
fn published_low_fidelity_link_needs_seven_pairs() {
    let inst = three_node_path();
    let space = two_fidelity_scenarios(&inst);
    let model = build_model(&inst, &space, ModelMode::Stochastic).unwrap();
    // Link 1 is 2->3 at base fidelity 0.55; scenario 0 demands 0.80.
    assert_eq!(model.pair_threshold(1, 0, 0), Some(7));
    // The route-gated threshold row carries -7 on the route flag.
    let row = model
        .program
        .find_constraint("fidelity[2->3,r1,s0]")
        .unwrap();
    let w = model
        .vars
        .id(qprov::model::VarKey::Route(inst.pair_slot_index(1, 0)))
        .unwrap();
    let coef = model
        .program
        .constraint_terms(row)
        .find(|&(v, _)| v == w)
        .map(|(_, c)| c)
        .unwrap();
    assert_eq!(coef, -7.0);
    // The healthy 0.9 link passes both demands with a single pair.
    assert_eq!(model.pair_threshold(0, 0, 0), Some(1));
}

#[test]
fn expected_value_mode_averages_demands() {
    let inst = three_node_path();
    let sets = vec![vec![DemandSets::uniform(
        vec![0.7, 0.9],
        vec![10],
        vec![0.004],
    )]];
    let space = build_scenario_space(sets).unwrap();
    let model = build_model(&inst, &space, ModelMode::ExpectedValue).unwrap();
    assert_eq!(model.space.scenarios.len(), 1);
    assert!((model.space.scenarios[0].fidelity[0][0] - 0.8).abs() < 1e-12);
}

#[test]
fn tiny_solve_routes_the_only_path() {
    let inst = three_node_path();
    let space = two_fidelity_scenarios(&inst);
    let out = solve_mode(&inst, &space, ModelMode::Stochastic).unwrap();
    assert_eq!(out.plan.routed_links(&inst, 0), vec![0, 1]);
    // Hand-computed optimum: 167 (first hop) + 1569 (0.55 hop, reserve 7,
    // top up 4 on demand when fidelity 0.9 needs an 11-pair chain) for
    // pairs, plus 17.8 for ten reserved-and-utilized qubits.
    assert!(
        (out.plan.cost.total - 1753.8).abs() < 1e-6,
        "total {}",
        out.plan.cost.total
    );
    assert!((out.plan.cost.total - out.milp.objective).abs() < 1e-5);

    // The 0.55 hop reserves 7 pairs, utilizes them in both scenarios, and
    // tops up with 4 on-demand pairs when fidelity 0.9 is demanded.
    let slot = inst.pair_slot_index(1, 0);
    assert_eq!(out.plan.pairs_reserved[slot], 7);
    assert_eq!(out.plan.pairs_utilized[0][slot], 7);
    assert_eq!(out.plan.pairs_ondemand[0][slot], 0);
    assert_eq!(out.plan.pairs_utilized[1][slot], 7);
    assert_eq!(out.plan.pairs_ondemand[1][slot], 4);
    // Qubits are fully reserved at the cheap rate.
    assert_eq!(out.plan.qubits_reserved[0], 10);
    assert_eq!(out.plan.qubits_ondemand[0][0], 0);
    assert_eq!(out.plan.overwait[0][0], 0.0);
}

#[test]
fn utilized_plus_ondemand_meets_thresholds_on_routed_links() {
    let inst = three_node_path();
    let space = two_fidelity_scenarios(&inst);
    let out = solve_mode(&inst, &space, ModelMode::Stochastic).unwrap();
    let model = build_model(&inst, &space, ModelMode::Stochastic).unwrap();
    for (s, slot) in inst.pair_slots().iter().enumerate() {
        if !out.plan.routes[s] {
            continue;
        }
        for k in 0..space.scenarios.len() {
            let need = model.pair_threshold(slot.link, slot.request, k).unwrap();
            let have = out.plan.pairs_utilized[k][s] + out.plan.pairs_ondemand[k][s];
            assert!(have >= need, "scenario {k}: {have} < {need}");
            let chained =
                qprov::purify::purify_chain(inst.topology.link(slot.link).base_fidelity, have)
                    .unwrap();
            let target = space
                .max_fidelity_demand(k, slot.request)
                .max(inst.topology.link(slot.link).fidelity_threshold);
            assert!(chained + 1e-9 >= target);
        }
    }
}

#[test]
fn route_gating_makes_reservation_products_exact() {
    // Without auxiliary product variables, exactness means the raw solver
    // values satisfy y_rep = w * y_rep bit-exactly: reservations vanish on
    // un-routed links and route flags are exact binaries.
    let inst = three_node_path();
    let space = two_fidelity_scenarios(&inst);
    let out = solve_mode(&inst, &space, ModelMode::Stochastic).unwrap();
    for s in 0..inst.pair_slots().len() {
        let w = out.milp.values[out
            .model
            .vars
            .id(qprov::model::VarKey::Route(s))
            .unwrap()
            .index()];
        let y = out.milp.values[out
            .model
            .vars
            .id(qprov::model::VarKey::PairsReserved(s))
            .unwrap()
            .index()];
        assert!(w == 0.0 || w == 1.0, "route flag fractional: {w}");
        assert!(w * y == y, "product broke: w={w} y={y}");
        for k in 0..space.scenarios.len() {
            let u = out.milp.values[out
                .model
                .vars
                .id(qprov::model::VarKey::PairsUtilized(s, k))
                .unwrap()
                .index()];
            assert!(u <= y, "utilization above reservation");
        }
    }
}

#[test]
fn zero_requests_solve_to_nothing() {
    let inst = three_node_path().with_requests(0).unwrap();
    let space = build_scenario_space(Vec::new()).unwrap();
    let out = solve_mode(&inst, &space, ModelMode::Stochastic).unwrap();
    assert_eq!(out.plan.cost.total, 0.0);
    assert!(out.plan.routes.is_empty());
    let cost = evaluate_cost(&out.plan, &inst, &space).unwrap();
    assert_eq!(cost.total, 0.0);
}

#[test]
fn unreachable_fidelity_blocks_the_route() {
    use qprov::domain::{CostModel, Instance, NetworkTopology, PhaseCost, Provider, Request};
    // A 0.4-fidelity link cannot purify up to a 0.8 threshold.
    let topology = NetworkTopology::builder()
        .node("1", 0.0, 0.0)
        .node("2", 0.0, 0.0)
        .directed_link("1", "2", common::link_params(0.4, 0.8, 9, 60))
        .build()
        .unwrap();
    let inst = Instance::assemble(
        topology,
        vec![Provider {
            id: "p1".into(),
            machines: vec![common::machine_with_exe("m1", 30, &[("r1", "c1", 0.004)])],
        }],
        vec![Request {
            id: "r1".into(),
            source: 0,
            destination: 1,
            circuits: vec![0],
        }],
        vec!["c1".into()],
        CostModel {
            pair: vec![vec![PhaseCost::default()]; 2],
            qubit: vec![vec![Default::default()]],
        },
    )
    .unwrap();
    let space = build_scenario_space(vec![vec![DemandSets::uniform(
        vec![0.8],
        vec![1],
        vec![0.004],
    )]])
    .unwrap();
    match build_model(&inst, &space, ModelMode::Stochastic) {
        Err(ModelError::NoFeasibleRoute { request, blocking }) => {
            assert_eq!(request, "r1");
            assert_eq!(blocking, vec!["1->2".to_string()]);
        }
        other => panic!("expected NoFeasibleRoute, got {other:?}"),
    }
}

#[test]
fn freezing_the_optimum_changes_nothing() {
    let inst = three_node_path();
    let space = two_fidelity_scenarios(&inst);
    let out = solve_mode(&inst, &space, ModelMode::Stochastic).unwrap();
    let score = evaluate_first_stage_against(&out.plan, &inst, &space).unwrap();
    assert!(
        (score.total - out.plan.cost.total).abs() < 1e-5,
        "{} vs {}",
        score.total,
        out.plan.cost.total
    );
}

#[test]
fn freezing_zero_reservations_pays_pure_ondemand() {
    let inst = three_node_path();
    let space = two_fidelity_scenarios(&inst);
    let out = solve_mode(&inst, &space, ModelMode::Stochastic).unwrap();
    let mut frozen = PlanSolution::empty(&inst, space.scenarios.len());
    frozen.routes = out.plan.routes.clone();
    frozen.assignment = out.plan.assignment.clone();
    // Reservations all zero: everything must come from the on-demand phase.
    let score = evaluate_first_stage_against(&frozen, &inst, &space).unwrap();
    // Pairs: 200 * (1+7) and 200 * (1+11) at probability one half each;
    // qubits: 10 on demand at 7 in both scenarios.
    let expected = 0.5 * (1600.0 + 2400.0) + 70.0;
    assert!(
        (score.total - expected).abs() < 1e-6,
        "total {} vs {expected}",
        score.total
    );
    assert_eq!(score.first_stage, 0.0);
}

#[test]
fn reservations_above_demand_use_no_ondemand() {
    let inst = three_node_path();
    let space = common::cap_respecting_scenarios(&inst);
    let out = solve_mode(&inst, &space, ModelMode::Stochastic).unwrap();
    let mut frozen = PlanSolution::empty(&inst, space.scenarios.len());
    frozen.routes = out.plan.routes.clone();
    frozen.assignment = out.plan.assignment.clone();
    for (s, &routed) in frozen.routes.iter().enumerate() {
        if routed {
            frozen.pairs_reserved[s] = 9;
        }
    }
    for (q, &assigned) in frozen.assignment.iter().enumerate() {
        if assigned {
            frozen.qubits_reserved[q] = 30;
        }
    }
    let score = evaluate_first_stage_against(&frozen, &inst, &space).unwrap();
    for k in 0..space.scenarios.len() {
        for s in 0..inst.pair_slots().len() {
            assert_eq!(score.plan.pairs_ondemand[k][s], 0);
        }
        for q in 0..inst.qubit_slots().len() {
            assert_eq!(score.plan.qubits_ondemand[k][q], 0);
        }
    }
}

#[test]
fn infeasible_scenarios_reported_when_frozen_ondemand_runs_out() {
    use qprov::domain::{CostModel, Instance, NetworkTopology, PhaseCost, Provider, Request};
    // On-demand capacity 3 cannot cover the 7-pair threshold alone.
    let topology = NetworkTopology::builder()
        .node("1", 0.0, 0.0)
        .node("2", 0.0, 0.0)
        .directed_link("1", "2", common::link_params(0.55, 0.8, 9, 3))
        .build()
        .unwrap();
    let inst = Instance::assemble(
        topology,
        vec![Provider {
            id: "p1".into(),
            machines: vec![common::machine_with_exe("m1", 30, &[("r1", "c1", 0.004)])],
        }],
        vec![Request {
            id: "r1".into(),
            source: 0,
            destination: 1,
            circuits: vec![0],
        }],
        vec!["c1".into()],
        CostModel {
            pair: vec![vec![PhaseCost::default()]; 2],
            qubit: vec![vec![Default::default()]],
        },
    )
    .unwrap();
    let space = build_scenario_space(vec![vec![DemandSets::uniform(
        vec![0.8],
        vec![1],
        vec![0.004],
    )]])
    .unwrap();
    let mut frozen = PlanSolution::empty(&inst, 1);
    frozen.routes[inst.pair_slot_index(0, 0)] = true;
    frozen.assignment[0] = true;
    match evaluate_first_stage_against(&frozen, &inst, &space) {
        Err(ModelError::RecourseInfeasible(scenarios)) => assert_eq!(scenarios, vec![0]),
        other => panic!("expected RecourseInfeasible, got {other:?}"),
    }
}

#[test]
fn perfect_information_bounds_the_stochastic_solve() {
    let inst = three_node_path();
    let space = two_fidelity_scenarios(&inst);
    let sp = solve_mode(&inst, &space, ModelMode::Stochastic).unwrap();
    let det = qprov::model::perfect_information_total(&inst, &space).unwrap();
    assert!(
        det <= sp.plan.cost.total + 1e-6,
        "det {det} > sp {}",
        sp.plan.cost.total
    );
}
