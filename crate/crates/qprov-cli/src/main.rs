//! Command-line planner: solve instances from files, run preset sweeps and
//! model comparisons, and query purification pair counts.
//!
//! Exit codes: 0 on success, 2 when the planning problem is infeasible,
//! 1 on usage or I/O errors. Log verbosity comes from `RUST_LOG`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use qprov::benders::{run_decomposed, BendersConfig, BendersError};
use qprov::domain::{
    build_scenario_space, parse_scenario_sets, DomainError, Instance, PlanSolution, ScenarioSpace,
};
use qprov::experiments::{
    compare_models, nsfnet_instance, preset_scenarios, sweep, ExperimentError, ExperimentSpec,
    Mode, PresetOptions, SweepVariable,
};
use qprov::model::{evaluate_first_stage_against, solve_mode, ModelError, ModelMode};
use qprov::purify::min_pairs_for_target;

#[derive(Parser)]
#[command(
    name = "qprov",
    version,
    about = "Entangled-pair and qubit provisioning planner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance from topology/costs/requests/scenarios files.
    Plan(PlanArgs),
    /// Sweep a parameter over the bundled NSFNET preset.
    Sweep(SweepArgs),
    /// Compare the stochastic, expected-value and wait-and-see models.
    Compare(CompareArgs),
    /// Minimum pair count for a purification target.
    Purify(PurifyArgs),
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    costs: PathBuf,
    #[arg(long)]
    requests: PathBuf,
    #[arg(long)]
    scenarios: PathBuf,
    /// One of: sp, ev, det, benders.
    #[arg(long)]
    mode: String,
    /// Benders bound-gap tolerance (applied to both loops).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Accepted for interface stability; demands come from --scenarios.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Also write the built model in LP text format, for cross-checking
    /// against external solvers.
    #[arg(long)]
    dump_model: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Preset name; only "nsfnet" is bundled.
    #[arg(long, default_value = "nsfnet")]
    preset: String,
    /// One of: reserved-pairs, fidelity-demand, reservation-price,
    /// penalty-price, waiting-time, request-count.
    #[arg(long)]
    var: String,
    /// Inclusive range A:B:STEP.
    #[arg(long)]
    range: String,
    /// Comma-separated list of sp, ev, det, benders.
    #[arg(long)]
    modes: String,
    #[arg(long, default_value_t = 1)]
    requests: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    fidelity_levels: usize,
    #[arg(long, default_value_t = 1)]
    qubit_levels: usize,
    #[arg(long, default_value_t = 1)]
    wait_levels: usize,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, default_value = "nsfnet")]
    preset: String,
    #[arg(long, default_value_t = 2)]
    requests: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    fidelity_levels: usize,
    #[arg(long, default_value_t = 1)]
    qubit_levels: usize,
    #[arg(long, default_value_t = 1)]
    wait_levels: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PurifyArgs {
    /// Base fidelity shared by every pair on the link.
    #[arg(long)]
    base: f64,
    /// Fidelity the chain must reach.
    #[arg(long)]
    target: f64,
    #[arg(long, default_value_t = 60)]
    max_pairs: u32,
}

enum AppError {
    Infeasible(String),
    Failure(String),
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Infeasible(m) | AppError::Failure(m) => write!(f, "{m}"),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Failure(format!("io error: {e}"))
    }
}

impl From<DomainError> for AppError {
    fn from(e: DomainError) -> Self {
        AppError::Failure(e.to_string())
    }
}

impl From<ModelError> for AppError {
    fn from(e: ModelError) -> Self {
        match &e {
            ModelError::Infeasible
            | ModelError::NoFeasibleRoute { .. }
            | ModelError::NoProvider(_)
            | ModelError::RecourseInfeasible(_) => AppError::Infeasible(e.to_string()),
            _ => AppError::Failure(e.to_string()),
        }
    }
}

impl From<BendersError> for AppError {
    fn from(e: BendersError) -> Self {
        match e {
            BendersError::Model(m) => m.into(),
            BendersError::SubproblemInfeasible { .. } => AppError::Infeasible(e.to_string()),
            other => AppError::Failure(other.to_string()),
        }
    }
}

impl From<ExperimentError> for AppError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Model(m) => m.into(),
            ExperimentError::Benders(b) => b.into(),
            other => AppError::Failure(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Plan(args) => plan(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Compare(args) => compare(args),
        Command::Purify(args) => purify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Infeasible(m)) => {
            eprintln!("infeasible: {m}");
            ExitCode::from(2)
        }
        Err(AppError::Failure(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

fn load_instance(args: &PlanArgs) -> Result<(Instance, ScenarioSpace), AppError> {
    let topology = fs::read_to_string(&args.topology)?;
    let costs = fs::read_to_string(&args.costs)?;
    let requests = fs::read_to_string(&args.requests)?;
    let instance = Instance::parse(&topology, &costs, &requests)?;
    let scenario_text = fs::read_to_string(&args.scenarios)?;
    let sets = parse_scenario_sets(&scenario_text, &instance)?;
    let space = build_scenario_space(sets)?;
    Ok((instance, space))
}

/// Flattens a plan into `record,request,element,scenario,value` rows,
/// skipping zero entries.
fn plan_csv(instance: &Instance, space: &ScenarioSpace, plan: &PlanSolution, mode: &str) -> String {
    let mut out = String::from("# qprov plan csv v1\n");
    out.push_str(&format!("# mode={mode}\n"));
    out.push_str("record,request,element,scenario,value\n");
    let money = |v: f64| format!("{v:.6}");
    out.push_str(&format!("cost_total,,,,{}\n", money(plan.cost.total)));
    out.push_str(&format!(
        "cost_first_stage,,,,{}\n",
        money(plan.cost.first_stage)
    ));
    out.push_str(&format!(
        "cost_second_stage_expected,,,,{}\n",
        money(plan.cost.second_stage_expected)
    ));
    for (k, c) in plan.cost.per_scenario.iter().enumerate() {
        out.push_str(&format!("cost_scenario,,,{k},{}\n", money(*c)));
    }
    for (s, slot) in instance.pair_slots().iter().enumerate() {
        if !plan.routes[s] {
            continue;
        }
        let req = &instance.requests[slot.request].id;
        let link = instance.topology.link_name(slot.link);
        out.push_str(&format!("route,{req},{link},,1\n"));
        if plan.pairs_reserved[s] > 0 {
            out.push_str(&format!(
                "pairs_reserved,{req},{link},,{}\n",
                plan.pairs_reserved[s]
            ));
        }
        for k in 0..space.scenarios.len() {
            if plan.pairs_utilized[k][s] > 0 {
                out.push_str(&format!(
                    "pairs_utilized,{req},{link},{k},{}\n",
                    plan.pairs_utilized[k][s]
                ));
            }
            if plan.pairs_ondemand[k][s] > 0 {
                out.push_str(&format!(
                    "pairs_ondemand,{req},{link},{k},{}\n",
                    plan.pairs_ondemand[k][s]
                ));
            }
        }
    }
    for (q, slot) in instance.qubit_slots().iter().enumerate() {
        if !plan.assignment[q] {
            continue;
        }
        let req = &instance.requests[slot.request].id;
        let element = format!(
            "{}@{}:{}",
            instance.circuits[slot.circuit],
            instance.providers[slot.provider].id,
            instance.providers[slot.provider].machines[slot.machine].id
        );
        out.push_str(&format!("assignment,{req},{element},,1\n"));
        if plan.qubits_reserved[q] > 0 {
            out.push_str(&format!(
                "qubits_reserved,{req},{element},,{}\n",
                plan.qubits_reserved[q]
            ));
        }
        for k in 0..space.scenarios.len() {
            if plan.qubits_utilized[k][q] > 0 {
                out.push_str(&format!(
                    "qubits_utilized,{req},{element},{k},{}\n",
                    plan.qubits_utilized[k][q]
                ));
            }
            if plan.qubits_ondemand[k][q] > 0 {
                out.push_str(&format!(
                    "qubits_ondemand,{req},{element},{k},{}\n",
                    plan.qubits_ondemand[k][q]
                ));
            }
            if plan.overwait[k][q] > 0.0 {
                out.push_str(&format!(
                    "overwait,{req},{element},{k},{}\n",
                    money(plan.overwait[k][q])
                ));
            }
        }
    }
    out
}

fn plan(args: PlanArgs) -> Result<(), AppError> {
    let (instance, space) = load_instance(&args)?;
    log::info!(
        "instance: {} nodes, {} links, {} requests, {} scenarios",
        instance.topology.nodes().len(),
        instance.topology.links().len(),
        instance.requests.len(),
        space.scenarios.len()
    );
    if let Some(path) = &args.dump_model {
        let model = qprov::model::build_model(&instance, &space, ModelMode::Stochastic)?;
        fs::write(path, qprov::solver::write_lp_format(&model.program))?;
    }
    let csv = match args.mode.as_str() {
        "sp" => {
            let out = solve_mode(&instance, &space, ModelMode::Stochastic)?;
            plan_csv(&instance, &space, &out.plan, "sp")
        }
        "ev" => {
            let solved = solve_mode(&instance, &space, ModelMode::ExpectedValue)?;
            let score = evaluate_first_stage_against(&solved.plan, &instance, &space)?;
            plan_csv(&instance, &space, &score.plan, "ev")
        }
        "det" => {
            // One solve per scenario with demands known; the total is their
            // probability-weighted sum.
            let mut out = String::from("# qprov plan csv v1\n# mode=det\n");
            out.push_str("record,request,element,scenario,value\n");
            let mut total = 0.0;
            let mut rows = String::new();
            for (k, scenario) in space.scenarios.iter().enumerate() {
                let solved = solve_mode(&instance, &space, ModelMode::PerfectInformation(k))?;
                total += scenario.probability * solved.plan.cost.total;
                rows.push_str(&format!(
                    "cost_scenario,,,{k},{:.6}\n",
                    solved.plan.cost.total
                ));
            }
            out.push_str(&format!("cost_total,,,,{total:.6}\n"));
            out.push_str(&rows);
            out
        }
        "benders" => {
            let mut config = BendersConfig::default();
            if let Some(eps) = args.epsilon {
                config.epsilon_pairs = eps;
                config.epsilon_qubits = eps;
            }
            let (plan, report) = run_decomposed(&instance, &space, &config)?;
            write_sibling(
                &args.out,
                "pairs.benders.csv",
                &report.pairs.trajectory_csv(),
            )?;
            write_sibling(
                &args.out,
                "qubits.benders.csv",
                &report.qubits.trajectory_csv(),
            )?;
            plan_csv(&instance, &space, &plan, "benders")
        }
        other => {
            return Err(AppError::Failure(format!(
                "unknown mode '{other}' (expected sp, ev, det or benders)"
            )))
        }
    };
    fs::write(&args.out, csv)?;
    Ok(())
}

fn write_sibling(out: &Path, suffix: &str, content: &str) -> Result<(), AppError> {
    let mut path = out.to_path_buf();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    path.set_file_name(format!("{name}.{suffix}"));
    fs::write(path, content)?;
    Ok(())
}

fn parse_range(range: &str) -> Result<Vec<f64>, AppError> {
    let parts: Vec<&str> = range.split(':').collect();
    if parts.len() != 3 {
        return Err(AppError::Failure(format!(
            "range must be A:B:STEP, got '{range}'"
        )));
    }
    let a: f64 = parts[0]
        .parse()
        .map_err(|_| AppError::Failure(format!("bad range start '{}'", parts[0])))?;
    let b: f64 = parts[1]
        .parse()
        .map_err(|_| AppError::Failure(format!("bad range end '{}'", parts[1])))?;
    let step: f64 = parts[2]
        .parse()
        .map_err(|_| AppError::Failure(format!("bad range step '{}'", parts[2])))?;
    if step <= 0.0 || b < a {
        return Err(AppError::Failure(format!("empty range '{range}'")));
    }
    let mut values = Vec::new();
    let mut v = a;
    while v <= b + 1e-9 {
        values.push(v);
        v += step;
    }
    Ok(values)
}

fn check_preset(name: &str) -> Result<(), AppError> {
    if name != "nsfnet" {
        return Err(AppError::Failure(format!(
            "unknown preset '{name}' (only nsfnet is bundled)"
        )));
    }
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<(), AppError> {
    check_preset(&args.preset)?;
    let variable = SweepVariable::parse(&args.var).map_err(AppError::from)?;
    let values = parse_range(&args.range)?;
    let modes: Result<Vec<Mode>, _> = args.modes.split(',').map(Mode::parse).collect();
    let modes = modes.map_err(AppError::from)?;
    let mut benders = BendersConfig::default();
    if let Some(eps) = args.epsilon {
        benders.epsilon_pairs = eps;
        benders.epsilon_qubits = eps;
    }
    let spec = ExperimentSpec {
        variable,
        values,
        modes,
        preset: PresetOptions {
            requests: args.requests,
            fidelity_levels: args.fidelity_levels,
            qubit_levels: args.qubit_levels,
            wait_levels: args.wait_levels,
            seed: args.seed,
        },
        benders,
    };
    let report = sweep(&spec)?;
    fs::write(&args.out, report.to_csv())?;
    Ok(())
}

fn compare(args: CompareArgs) -> Result<(), AppError> {
    check_preset(&args.preset)?;
    let options = PresetOptions {
        requests: args.requests,
        fidelity_levels: args.fidelity_levels,
        qubit_levels: args.qubit_levels,
        wait_levels: args.wait_levels,
        seed: args.seed,
    };
    let instance = nsfnet_instance(options.requests)?;
    let space = preset_scenarios(&instance, &options)?;
    let outcome = compare_models(&instance, &space)?;
    fs::write(&args.out, outcome.report.to_csv())?;
    println!(
        "sp={:.6} ev={:.6} det={:.6} ordering_ok={}",
        outcome.sp_total, outcome.ev_total, outcome.det_total, outcome.ordering_ok
    );
    Ok(())
}

fn purify(args: PurifyArgs) -> Result<(), AppError> {
    let found = min_pairs_for_target(args.base, args.target, args.max_pairs)
        .map_err(|e| AppError::Failure(e.to_string()))?;
    match found {
        Some(k) => {
            let achieved = qprov::purify::purify_chain(args.base, k)
                .map_err(|e| AppError::Failure(e.to_string()))?;
            println!("pairs: {k}");
            println!("achieved: {achieved:.6}");
            Ok(())
        }
        None => Err(AppError::Infeasible(format!(
            "target {} unreachable from base {} within {} pairs",
            args.target, args.base, args.max_pairs
        ))),
    }
}
