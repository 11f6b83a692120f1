mod common;

use qprov::benders::BendersConfig;
use qprov::domain::{build_scenario_space, DemandSets, Instance};
use qprov::experiments::{
    compare_models, nsfnet_instance, preset_scenarios, sweep, sweep_rows, ExperimentSpec, Mode,
    PresetOptions, SweepVariable,
};

fn spec(variable: SweepVariable, values: Vec<f64>, modes: Vec<Mode>) -> ExperimentSpec {
    ExperimentSpec {
        variable,
        values,
        modes,
        preset: PresetOptions {
            requests: 1,
            ..PresetOptions::default()
        },
        benders: BendersConfig::default(),
    }
}

/// Two nodes joined by the published 0.55-fidelity fiber; utilization is
/// priced at zero so the second stage can genuinely empty out. The request
/// carries no circuits: this isolates the pair economics.
fn published_link_instance() -> Instance {
    let topology = "\
node 1 ecc=5 scs=151
node 2 ecc=5 scs=151
link 1 2 f=0.55 fts=0.8 rcap=9 ocap=60
";
    let costs = "paircost * * r=10 u=0 o=200\n";
    let requests = "request r1 src=1 dst=2 circuits=\n";
    Instance::parse(topology, costs, requests).unwrap()
}

fn column(report: &qprov::experiments::CsvReport, name: &str) -> Vec<f64> {
    let idx = report.header.iter().position(|h| h == name).unwrap();
    report
        .rows
        .iter()
        .map(|r| r[idx].parse::<f64>().unwrap())
        .collect()
}

#[test]
fn reserved_pair_sweep_shows_the_published_cost_split() {
    let instance = published_link_instance();
    let sets = vec![vec![DemandSets::uniform(
        vec![0.7, 0.85],
        vec![0],
        vec![0.001],
    )]];
    let space = build_scenario_space(sets).unwrap();
    let spec = spec(
        SweepVariable::ReservedPairs,
        (0..=9).map(|v| v as f64).collect(),
        vec![Mode::Sp],
    );
    let report = sweep_rows(&instance, &space, &spec).unwrap();
    let first = column(&report, "first_stage_cost");
    let second = column(&report, "second_stage_cost");
    let total = column(&report, "total_cost");

    // First-stage cost never decreases as more pairs are pinned.
    for w in first.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "first stage dipped: {w:?}");
    }
    // The second stage empties out once reservations cover every demand.
    for w in second.windows(2) {
        assert!(w[1] <= w[0] + 1e-9, "second stage grew: {w:?}");
    }
    assert_eq!(*second.last().unwrap(), 0.0);
    // On-demand at 200 versus 166 per reserved pair buys an interior optimum.
    let argmin = total
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    assert!(
        argmin > 0 && argmin < total.len() - 1,
        "minimizer at {argmin}"
    );
    // The 0.8 link threshold floors both scenarios at 7 pairs; the 0.85
    // demand needs 9. Marginal reservation beats on-demand up to 7.
    assert_eq!(argmin, 7);
}

#[test]
fn fidelity_sweep_uses_ondemand_only_after_saturating_reservation() {
    let instance = published_link_instance();
    let sets = vec![vec![DemandSets::uniform(vec![0.7], vec![0], vec![0.001])]];
    let space = build_scenario_space(sets).unwrap();
    let spec = spec(
        SweepVariable::FidelityDemand,
        vec![0.70, 0.80, 0.83, 0.85, 0.88, 0.90],
        vec![Mode::Sp],
    );
    let report = sweep_rows(&instance, &space, &spec).unwrap();
    let utilized = column(&report, "pairs_utilized");
    let ondemand = column(&report, "pairs_ondemand");
    for (u, o) in utilized.iter().zip(&ondemand) {
        if *o > 0.0 {
            assert_eq!(*u, 9.0, "on-demand used before the 9-pair cap");
        }
    }
    // The sweep's top demands genuinely cross the cap.
    assert!(ondemand.last().copied().unwrap() > 0.0);
    assert!(ondemand[0] == 0.0);
    // Utilization never decreases with the demand.
    for w in utilized.windows(2) {
        assert!(w[1] >= w[0] - 1e-9);
    }
}

#[test]
fn generous_waits_never_pay_penalties() {
    let spec = spec(
        SweepVariable::WaitingTime,
        vec![0.008, 0.009, 0.01],
        vec![Mode::Sp],
    );
    let report = sweep(&spec).unwrap();
    // Request r1 runs a 14-qubit circuit estimated just under 0.008 s.
    for v in column(&report, "overwait_seconds") {
        assert_eq!(v, 0.0);
    }
}

#[test]
fn total_cost_monotone_in_reservation_price() {
    let spec = spec(
        SweepVariable::ReservationPrice,
        vec![1.0, 5.0, 10.0, 50.0, 200.0, 400.0],
        vec![Mode::Sp],
    );
    let report = sweep(&spec).unwrap();
    let total = column(&report, "total_cost");
    for w in total.windows(2) {
        assert!(w[1] >= w[0] - 1e-9, "total fell as price rose: {w:?}");
    }
}

#[test]
fn sweep_totals_balance_and_infeasible_points_stay() {
    let instance = published_link_instance();
    let sets = vec![vec![DemandSets::uniform(vec![0.7], vec![0], vec![0.001])]];
    let space = build_scenario_space(sets).unwrap();
    // 12 reserved pairs exceed the 9-pair capacity: infeasible, not dropped.
    let spec = spec(
        SweepVariable::ReservedPairs,
        vec![2.0, 12.0],
        vec![Mode::Sp],
    );
    let report = sweep_rows(&instance, &space, &spec).unwrap();
    assert_eq!(report.rows.len(), 2);
    let status = report.header.iter().position(|h| h == "status").unwrap();
    assert_eq!(report.rows[0][status], "optimal");
    assert_eq!(report.rows[1][status], "infeasible");
    let fs = column_opt(&report, "first_stage_cost");
    let ss = column_opt(&report, "second_stage_cost");
    let tot = column_opt(&report, "total_cost");
    for i in 0..report.rows.len() {
        if let (Some(f), Some(s), Some(t)) = (fs[i], ss[i], tot[i]) {
            assert!((f + s - t).abs() < 1e-6);
        }
    }
}

fn column_opt(report: &qprov::experiments::CsvReport, name: &str) -> Vec<Option<f64>> {
    let idx = report.header.iter().position(|h| h == name).unwrap();
    report
        .rows
        .iter()
        .map(|r| r[idx].parse::<f64>().ok())
        .collect()
}

#[test]
fn sweeps_are_byte_deterministic() {
    let spec = spec(
        SweepVariable::ReservedPairs,
        (0..=4).map(|v| v as f64).collect(),
        vec![Mode::Sp, Mode::Ev],
    );
    let a = sweep(&spec).unwrap().to_csv();
    let b = sweep(&spec).unwrap().to_csv();
    assert_eq!(a, b);
}

#[test]
fn compare_orders_the_three_models() {
    let instance = nsfnet_instance(1).unwrap();
    let options = PresetOptions {
        requests: 1,
        ..PresetOptions::default()
    };
    let space = preset_scenarios(&instance, &options).unwrap();
    let outcome = compare_models(&instance, &space).unwrap();
    assert!(
        outcome.ordering_ok,
        "det {} sp {} ev {}",
        outcome.det_total, outcome.sp_total, outcome.ev_total
    );
    assert!(outcome.det_total <= outcome.sp_total + 1e-5);
    assert!(outcome.sp_total <= outcome.ev_total + 1e-5);
    let csv = outcome.report.to_csv();
    assert!(csv.contains("ordering det<=sp<=ev: ok"));
    // Single-scenario spaces collapse all three models together.
    let one = space.restricted_to(0);
    let collapsed = compare_models(&instance, &one).unwrap();
    assert!((collapsed.sp_total - collapsed.ev_total).abs() < 1e-5);
    assert!((collapsed.sp_total - collapsed.det_total).abs() < 1e-5);
}

#[test]
fn request_count_sweep_rebuilds_the_preset() {
    let spec = spec(SweepVariable::RequestCount, vec![1.0, 2.0], vec![Mode::Sp]);
    let report = sweep(&spec).unwrap();
    let total = column(&report, "total_cost");
    assert_eq!(total.len(), 2);
    // More requests can only cost more.
    assert!(total[1] > total[0]);
}
