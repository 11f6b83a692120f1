//! Benders decomposition of the provisioning problem.
//!
//! The pair and qubit halves are decomposed separately, each around its
//! scenario-indexed utilization variables as the complicating set. A master
//! problem prices utilization plus an epigraph variable bounded by optimality
//! cuts; fixing the master's utilization splits the tail into a reservation
//! subproblem and one on-demand subproblem per scenario, all solved
//! independently (the per-scenario solves run in parallel).
//!
//! Subproblems carry integer variables, so cut slopes come from the reduced
//! costs of the fixed utilization variables in each subproblem's LP
//! relaxation, with the LP optimum as the cut constant; the integer solve of
//! the same subproblem prices the upper bound. On the lattices this planner
//! produces, the relaxations have integral optima, so the decomposition
//! closes its gap against the direct solve.
//!
//! The loop stops when the best upper bound comes within epsilon of the
//! master's lower bound, tracking the best incumbent across iterations.

use rayon::prelude::*;

use crate::domain::{evaluate_cost, Instance, PlanSolution, ScenarioSpace};
use crate::model::{self, ModelError, ModelMode, ModelOptions, ModelParts};
use crate::solver::{
    solve_lp, solve_milp, solve_milp_with, LinearProgram, LpStatus, MilpOptions, MilpStatus, Sense,
    VarId, VarKind, DEFAULT_GAP,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BendersError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] crate::solver::SolverError),
    #[error("master problem became {0:?}")]
    MasterFailed(MilpStatus),
    #[error("subproblem infeasible{}", match .scenario { Some(k) => format!(" in scenario {k}"), None => String::new() })]
    SubproblemInfeasible { scenario: Option<usize> },
    #[error("no incumbent found before the iteration limit")]
    NoIncumbent,
}

#[derive(Debug, Clone)]
pub struct BendersConfig {
    /// Absolute bound-gap tolerance of the entangled-pair loop.
    pub epsilon_pairs: f64,
    /// Absolute bound-gap tolerance of the qubit loop.
    pub epsilon_qubits: f64,
    pub max_iterations: usize,
}

impl Default for BendersConfig {
    fn default() -> Self {
        Self {
            epsilon_pairs: 0.05,
            epsilon_qubits: 0.05,
            max_iterations: 200,
        }
    }
}

/// One optimality cut over the complicating utilization variables:
/// `epigraph >= constant + coefficients . y`.
#[derive(Debug, Clone)]
pub struct Cut {
    pub coefficients: Vec<f64>,
    pub constant: f64,
    pub source_iteration: usize,
}

impl Cut {
    /// Right-hand side of the cut at a complicating point.
    pub fn evaluate(&self, y: &[f64]) -> f64 {
        self.constant
            + self
                .coefficients
                .iter()
                .zip(y)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }
}

#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Master objective: the lower bound.
    pub lower: f64,
    /// Cost of the iteration's own incumbent.
    pub upper: f64,
    /// Best upper bound so far; drives the stopping test.
    pub best_upper: f64,
    pub gap: f64,
    /// Value of the epigraph variable at the master optimum.
    pub epigraph: f64,
    /// On-demand subproblems solved this iteration (one per scenario).
    pub scenario_subproblems: usize,
}

/// Full trace of one decomposition loop.
#[derive(Debug, Clone, Default)]
pub struct BendersState {
    pub iterations: Vec<IterationRecord>,
    pub cuts: Vec<Cut>,
    pub converged: bool,
    /// Complicating keys: (slot index, scenario) in cut-coefficient order.
    pub complicating: Vec<(usize, usize)>,
    /// Master utilization fix per iteration.
    pub fixed_values: Vec<Vec<f64>>,
    /// Cut slopes (reservation plus on-demand duals) per iteration.
    pub duals: Vec<Vec<f64>>,
    /// Cost of the best incumbent.
    pub best_objective: f64,
}

impl BendersState {
    /// Bound trajectory as CSV: iteration, lower, upper, best_upper, gap.
    pub fn trajectory_csv(&self) -> String {
        let mut out = String::from("iteration,lower,upper,best_upper,gap\n");
        for rec in &self.iterations {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{:.6}\n",
                rec.iteration, rec.lower, rec.upper, rec.best_upper, rec.gap
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct BendersReport {
    pub pairs: BendersState,
    pub qubits: BendersState,
}

/// Entangled-pair phase decisions found by the pair loop.
#[derive(Debug, Clone)]
pub struct PairPhasePlan {
    pub routes: Vec<bool>,
    pub pairs_reserved: Vec<u32>,
    pub pairs_utilized: Vec<Vec<u32>>,
    pub pairs_ondemand: Vec<Vec<u32>>,
    /// Reservation plus expected utilization and on-demand cost.
    pub cost: f64,
}

/// Qubit phase decisions found by the qubit loop.
#[derive(Debug, Clone)]
pub struct QubitPhasePlan {
    pub assignment: Vec<bool>,
    pub qubits_reserved: Vec<u32>,
    pub qubits_utilized: Vec<Vec<u32>>,
    pub qubits_ondemand: Vec<Vec<u32>>,
    pub overwait: Vec<Vec<f64>>,
    pub cost: f64,
}

/// Tail solve at a fixed complicating point.
struct TailSolve<T> {
    /// LP-relaxation tail value: the cut constant before recentering.
    lp_value: f64,
    /// Integer tail value: prices the upper bound.
    mip_value: f64,
    /// Cut slope per complicating variable.
    duals: Vec<f64>,
    payload: T,
}

struct LoopResult<T> {
    state: BendersState,
    best_fix: Vec<f64>,
    best_payload: T,
}

/// Iterations of pure cut refinement before the stabilization row joins the
/// master. Optimality cuts drive the early bound climb; the stabilizer then
/// closes the remaining gap without an unbounded cut tail.
const STABILIZE_AFTER: usize = 6;

/// Shared master-subproblem iteration driver.
///
/// `stabilizer` is a valid inequality over the master's variables
/// (`terms >= rhs`) that prices the tail exactly up to shared-capacity
/// coupling; it joins the master after [`STABILIZE_AFTER`] iterations, or
/// immediately once a master solve comes back truncated. Adding rows only
/// tightens a relaxation, so bound validity and monotonicity survive.
#[allow(clippy::too_many_arguments)]
fn benders_loop<T: Clone>(
    complicating: Vec<(usize, usize)>,
    scenario_count: usize,
    epsilon: f64,
    max_iterations: usize,
    mut master: LinearProgram,
    master_y: Vec<VarId>,
    master_epigraph: VarId,
    stabilizer: (Vec<(VarId, f64)>, f64),
    solve_tail: impl Fn(&[f64]) -> Result<TailSolve<T>, BendersError>,
) -> Result<LoopResult<T>, BendersError> {
    let mut state = BendersState {
        complicating,
        ..BendersState::default()
    };
    let mut best: Option<(f64, Vec<f64>, T)> = None;
    let mut lower = f64::NEG_INFINITY;
    let mut stabilized = false;

    // The master only needs to be solved well inside the loop tolerance;
    // its proven bound, not its incumbent, is the valid lower bound.
    let master_options = MilpOptions {
        gap_tolerance: DEFAULT_GAP,
        absolute_gap: epsilon * 0.25,
        node_limit: 50_000,
    };

    for iteration in 1..=max_iterations {
        if !stabilized && iteration > STABILIZE_AFTER && !stabilizer.0.is_empty() {
            master.add_constraint("tail_floor", &stabilizer.0, Sense::Ge, stabilizer.1)?;
            stabilized = true;
        }
        let mut solved = solve_milp_with(&master, &master_options)?;
        if solved.status == MilpStatus::NodeLimit && !stabilized && !stabilizer.0.is_empty() {
            master.add_constraint("tail_floor", &stabilizer.0, Sense::Ge, stabilizer.1)?;
            stabilized = true;
            solved = solve_milp_with(&master, &master_options)?;
        }
        log::debug!(
            "benders iteration {iteration}: master {:?}, {} nodes, bound {:.4}",
            solved.status,
            solved.node_count,
            solved.best_bound
        );
        let usable = solved.status == MilpStatus::Optimal
            || (solved.status == MilpStatus::NodeLimit && !solved.values.is_empty());
        if !usable {
            return Err(BendersError::MasterFailed(solved.status));
        }
        // Added cuts only tighten the master, so the bound is monotone.
        lower = lower.max(solved.best_bound);
        let epigraph = solved.values[master_epigraph.index()];
        let fix: Vec<f64> = master_y
            .iter()
            .map(|id| solved.values[id.index()])
            .collect();

        let tail = solve_tail(&fix)?;
        // Upper bound: the incumbent's master value minus its epigraph
        // estimate, plus the true tail cost of this fix.
        let upper = solved.objective - epigraph + tail.mip_value;
        let improved = match &best {
            Some((b, _, _)) => upper < *b,
            None => true,
        };
        if improved {
            best = Some((upper, fix.clone(), tail.payload.clone()));
        }
        let best_upper = best.as_ref().map(|(b, _, _)| *b).unwrap();
        let gap = best_upper - lower;
        state.iterations.push(IterationRecord {
            iteration,
            lower,
            upper,
            best_upper,
            gap,
            epigraph,
            scenario_subproblems: scenario_count,
        });
        state.fixed_values.push(fix.clone());
        state.duals.push(tail.duals.clone());

        if gap < epsilon {
            state.converged = true;
            break;
        }
        if iteration == max_iterations {
            break;
        }

        // New optimality cut, recentered at the fix.
        let constant = tail.lp_value - tail.duals.iter().zip(&fix).map(|(d, f)| d * f).sum::<f64>();
        let cut = Cut {
            coefficients: tail.duals.clone(),
            constant,
            source_iteration: iteration,
        };
        let mut terms: Vec<(VarId, f64)> = vec![(master_epigraph, 1.0)];
        for (id, &c) in master_y.iter().zip(&cut.coefficients) {
            if c != 0.0 {
                terms.push((*id, -c));
            }
        }
        master.add_constraint(format!("cut[{iteration}]"), &terms, Sense::Ge, cut.constant)?;
        state.cuts.push(cut);
    }

    let (best_cost, best_fix, best_payload) = best.ok_or(BendersError::NoIncumbent)?;
    state.best_objective = best_cost;
    Ok(LoopResult {
        state,
        best_fix,
        best_payload,
    })
}

/// Solves the route choice once, through the pair half of the direct model.
pub fn solve_routes(instance: &Instance, space: &ScenarioSpace) -> Result<Vec<bool>, BendersError> {
    let options = ModelOptions {
        parts: ModelParts {
            pairs: true,
            qubits: false,
        },
        ..ModelOptions::default()
    };
    let out = model::solve_mode_with(instance, space, ModelMode::Stochastic, &options)?;
    Ok(out.plan.routes)
}

/// Machine assignment fixed once through the qubit half of the direct model.
fn solve_assignment(instance: &Instance, space: &ScenarioSpace) -> Result<Vec<bool>, BendersError> {
    let options = ModelOptions {
        parts: ModelParts {
            pairs: false,
            qubits: true,
        },
        ..ModelOptions::default()
    };
    let out = model::solve_mode_with(instance, space, ModelMode::Stochastic, &options)?;
    Ok(out.plan.assignment)
}

/// Benders loop over the entangled-pair phases, with routes fixed.
pub fn solve_pair_benders(
    instance: &Instance,
    space: &ScenarioSpace,
    config: &BendersConfig,
    routes: &[bool],
) -> Result<(PairPhasePlan, BendersState), BendersError> {
    let ns = space.scenarios.len();
    let topo = &instance.topology;
    let thresholds = model::pair_thresholds(instance, space)?;
    let routed: Vec<usize> = (0..instance.pair_slots().len())
        .filter(|&s| routes[s])
        .collect();
    for &s in &routed {
        for k in 0..ns {
            if thresholds[s][k].is_none() {
                return Err(BendersError::SubproblemInfeasible { scenario: Some(k) });
            }
        }
    }

    // Complicating set: utilization on routed slots, per scenario.
    let mut complicating = Vec::new();
    for &s in &routed {
        for k in 0..ns {
            complicating.push((s, k));
        }
    }

    // Master: price utilization, bound it by what a feasible reservation
    // could cover, and keep it high enough that on-demand can finish the job.
    let mut master = LinearProgram::new();
    let mut y_ids = Vec::with_capacity(complicating.len());
    for &(s, k) in &complicating {
        let slot = &instance.pair_slots()[s];
        let link = topo.link(slot.link);
        let need = thresholds[s][k].unwrap();
        let floor = need.saturating_sub(link.ondemand_capacity) as f64;
        // Utilizing beyond the scenario's threshold never helps, so the box
        // stops there.
        let id = master.add_var(
            format!("yeep[{s},s{k}]"),
            VarKind::Integer,
            floor,
            link.reserve_capacity.min(need) as f64,
        )?;
        master.set_objective_coef(
            id,
            space.scenarios[k].probability * instance.pair_slot_cost(slot).utilize,
        );
        y_ids.push(id);
    }
    let mut level_ids = Vec::with_capacity(routed.len());
    for &s in &routed {
        let link = topo.link(instance.pair_slots()[s].link);
        let u = master.add_var(
            format!("level[{s}]"),
            VarKind::Continuous,
            0.0,
            link.reserve_capacity as f64,
        )?;
        level_ids.push((s, u));
    }
    for (ci, &(s, _)) in complicating.iter().enumerate() {
        let (_, u) = level_ids.iter().find(|&&(ls, _)| ls == s).unwrap();
        master.add_constraint(
            format!("level_cap[{ci}]"),
            &[(y_ids[ci], 1.0), (*u, -1.0)],
            Sense::Le,
            0.0,
        )?;
    }
    for (l, link) in topo.links().iter().enumerate() {
        let terms: Vec<_> = level_ids
            .iter()
            .filter(|&&(s, _)| instance.pair_slots()[s].link == l)
            .map(|&(_, u)| (u, 1.0))
            .collect();
        if terms.len() > 1 {
            master.add_constraint(
                format!("level_shared[{l}]"),
                &terms,
                Sense::Le,
                link.reserve_capacity as f64,
            )?;
        }
        // Shared on-demand capacity also floors total utilization.
        for k in 0..ns {
            let mut need_sum = 0u32;
            let mut terms = Vec::new();
            for (ci, &(s, sk)) in complicating.iter().enumerate() {
                if sk == k && instance.pair_slots()[s].link == l {
                    need_sum += thresholds[s][k].unwrap();
                    terms.push((y_ids[ci], 1.0));
                }
            }
            if terms.len() > 1 && need_sum > link.ondemand_capacity {
                master.add_constraint(
                    format!("od_floor[{l},s{k}]"),
                    &terms,
                    Sense::Ge,
                    (need_sum - link.ondemand_capacity) as f64,
                )?;
            }
        }
    }
    let alpha = master.add_var("alpha", VarKind::Continuous, 0.0, f64::INFINITY)?;
    master.set_objective_coef(alpha, 1.0);
    // Static floor: the tail pays at least the reservation covering the
    // utilization levels (the level variables linearize that max).
    {
        let terms: Vec<(VarId, f64)> = std::iter::once((alpha, 1.0))
            .chain(level_ids.iter().map(|&(s, u)| {
                let slot = &instance.pair_slots()[s];
                (u, -instance.pair_first_stage_price(slot))
            }))
            .collect();
        if terms.len() > 1 {
            master.add_constraint("res_floor", &terms, Sense::Ge, 0.0)?;
        }
    }
    // Stabilizer: additionally price the on-demand shortfall below each
    // threshold, linear because the utilization boxes stop at the threshold.
    // Exact up to shared on-demand coupling, which the cuts close.
    let stabilizer = {
        let mut terms = vec![(alpha, 1.0)];
        let mut rhs = 0.0;
        for &(s, u) in &level_ids {
            let slot = &instance.pair_slots()[s];
            terms.push((u, -instance.pair_first_stage_price(slot)));
        }
        for (ci, &(s, k)) in complicating.iter().enumerate() {
            let slot = &instance.pair_slots()[s];
            let rate = space.scenarios[k].probability * instance.pair_slot_cost(slot).ondemand;
            let need = thresholds[s][k].unwrap() as f64;
            terms.push((y_ids[ci], rate));
            rhs += rate * need;
        }
        if terms.len() > 1 {
            (terms, rhs)
        } else {
            (Vec::new(), 0.0)
        }
    };

    let solve_tail = |fix: &[f64]| -> Result<TailSolve<PairTail>, BendersError> {
        // Reservation subproblem over all scenarios at once.
        let mut s1 = LinearProgram::new();
        let mut rep_ids = Vec::with_capacity(routed.len());
        for &s in &routed {
            let slot = &instance.pair_slots()[s];
            let link = topo.link(slot.link);
            let id = s1.add_var(
                format!("yrep[{s}]"),
                VarKind::Integer,
                0.0,
                link.reserve_capacity as f64,
            )?;
            s1.set_objective_coef(id, instance.pair_first_stage_price(slot));
            rep_ids.push((s, id));
        }
        let mut fix_ids = Vec::with_capacity(complicating.len());
        for (ci, &(s, k)) in complicating.iter().enumerate() {
            let f = s1.add_var(
                format!("fix[{s},s{k}]"),
                VarKind::Continuous,
                fix[ci],
                fix[ci],
            )?;
            let (_, rep) = rep_ids.iter().find(|&&(rs, _)| rs == s).unwrap();
            s1.add_constraint(
                format!("cover[{ci}]"),
                &[(f, 1.0), (*rep, -1.0)],
                Sense::Le,
                0.0,
            )?;
            fix_ids.push(f);
        }
        for (l, link) in topo.links().iter().enumerate() {
            let terms: Vec<_> = rep_ids
                .iter()
                .filter(|&&(s, _)| instance.pair_slots()[s].link == l)
                .map(|&(_, id)| (id, 1.0))
                .collect();
            if terms.len() > 1 {
                s1.add_constraint(
                    format!("cap[{l}]"),
                    &terms,
                    Sense::Le,
                    link.reserve_capacity as f64,
                )?;
            }
        }
        let s1_lp = solve_lp(&s1)?;
        if s1_lp.status != LpStatus::Optimal {
            return Err(BendersError::SubproblemInfeasible { scenario: None });
        }
        let s1_mip = solve_milp(&s1, DEFAULT_GAP)?;
        if s1_mip.status != MilpStatus::Optimal {
            return Err(BendersError::SubproblemInfeasible { scenario: None });
        }
        let mut duals = vec![0.0; complicating.len()];
        for (ci, f) in fix_ids.iter().enumerate() {
            duals[ci] = s1_lp.reduced_costs[f.index()];
        }

        // Per-scenario on-demand subproblems, independently and in parallel.
        let per_scenario: Result<Vec<_>, BendersError> = (0..ns)
            .into_par_iter()
            .map(|k| {
                let mut s2 = LinearProgram::new();
                let mut od_ids = Vec::new();
                let mut fix2 = Vec::new();
                for (ci, &(s, sk)) in complicating.iter().enumerate() {
                    if sk != k {
                        continue;
                    }
                    let slot = &instance.pair_slots()[s];
                    let link = topo.link(slot.link);
                    let od = s2.add_var(
                        format!("yoep[{s}]"),
                        VarKind::Integer,
                        0.0,
                        link.ondemand_capacity as f64,
                    )?;
                    s2.set_objective_coef(
                        od,
                        space.scenarios[k].probability * instance.pair_slot_cost(slot).ondemand,
                    );
                    let f =
                        s2.add_var(format!("fix[{s}]"), VarKind::Continuous, fix[ci], fix[ci])?;
                    let need = thresholds[s][k].unwrap() as f64;
                    s2.add_constraint(
                        format!("fid[{s}]"),
                        &[(f, 1.0), (od, 1.0)],
                        Sense::Ge,
                        need,
                    )?;
                    od_ids.push((ci, s, od));
                    fix2.push((ci, f));
                }
                for (l, link) in topo.links().iter().enumerate() {
                    let terms: Vec<_> = od_ids
                        .iter()
                        .filter(|&&(_, s, _)| instance.pair_slots()[s].link == l)
                        .map(|&(_, _, id)| (id, 1.0))
                        .collect();
                    if terms.len() > 1 {
                        s2.add_constraint(
                            format!("odcap[{l}]"),
                            &terms,
                            Sense::Le,
                            link.ondemand_capacity as f64,
                        )?;
                    }
                }
                let lp = solve_lp(&s2)?;
                if lp.status != LpStatus::Optimal {
                    return Err(BendersError::SubproblemInfeasible { scenario: Some(k) });
                }
                let mip = solve_milp(&s2, DEFAULT_GAP)?;
                if mip.status != MilpStatus::Optimal {
                    return Err(BendersError::SubproblemInfeasible { scenario: Some(k) });
                }
                let mut scenario_duals = Vec::new();
                for &(ci, f) in &fix2 {
                    scenario_duals.push((ci, lp.reduced_costs[f.index()]));
                }
                let od_values: Vec<(usize, u32)> = od_ids
                    .iter()
                    .map(|&(_, s, id)| (s, mip.values[id.index()].round() as u32))
                    .collect();
                Ok((lp.objective, mip.objective, scenario_duals, od_values))
            })
            .collect();
        let per_scenario = per_scenario?;

        let mut lp_value = s1_lp.objective;
        let mut mip_value = s1_mip.objective;
        let mut ondemand = vec![vec![0u32; instance.pair_slots().len()]; ns];
        for (k, (lp_obj, mip_obj, scenario_duals, od_values)) in per_scenario.iter().enumerate() {
            lp_value += lp_obj;
            mip_value += mip_obj;
            for &(ci, d) in scenario_duals {
                duals[ci] += d;
            }
            for &(s, v) in od_values {
                ondemand[k][s] = v;
            }
        }
        let reserved: Vec<(usize, u32)> = rep_ids
            .iter()
            .map(|&(s, id)| (s, s1_mip.values[id.index()].round() as u32))
            .collect();
        Ok(TailSolve {
            lp_value,
            mip_value,
            duals,
            payload: PairTail { reserved, ondemand },
        })
    };

    let result = benders_loop(
        complicating.clone(),
        ns,
        config.epsilon_pairs,
        config.max_iterations,
        master,
        y_ids,
        alpha,
        stabilizer,
        solve_tail,
    )?;

    let mut plan = PairPhasePlan {
        routes: routes.to_vec(),
        pairs_reserved: vec![0; instance.pair_slots().len()],
        pairs_utilized: vec![vec![0; instance.pair_slots().len()]; ns],
        pairs_ondemand: result.best_payload.ondemand.clone(),
        cost: result.state.best_objective,
    };
    for &(s, v) in &result.best_payload.reserved {
        plan.pairs_reserved[s] = v;
    }
    for (ci, &(s, k)) in result.state.complicating.iter().enumerate() {
        plan.pairs_utilized[k][s] = result.best_fix[ci].round() as u32;
    }
    Ok((plan, result.state))
}

#[derive(Debug, Clone)]
struct PairTail {
    reserved: Vec<(usize, u32)>,
    ondemand: Vec<Vec<u32>>,
}

#[derive(Debug, Clone)]
struct QubitTail {
    reserved: Vec<(usize, u32)>,
    ondemand: Vec<Vec<u32>>,
    overwait: Vec<Vec<f64>>,
}

/// Benders loop over the qubit phases. The machine assignment is fixed first
/// through the qubit half of the direct model, mirroring how routes are fixed
/// for the pair loop.
pub fn solve_qubit_benders(
    instance: &Instance,
    space: &ScenarioSpace,
    config: &BendersConfig,
) -> Result<(QubitPhasePlan, BendersState), BendersError> {
    let assignment = solve_assignment(instance, space)?;
    solve_qubit_benders_assigned(instance, space, config, &assignment)
}

fn solve_qubit_benders_assigned(
    instance: &Instance,
    space: &ScenarioSpace,
    config: &BendersConfig,
    assignment: &[bool],
) -> Result<(QubitPhasePlan, BendersState), BendersError> {
    let ns = space.scenarios.len();
    let assigned: Vec<usize> = (0..instance.qubit_slots().len())
        .filter(|&q| assignment[q])
        .collect();

    let mut complicating = Vec::new();
    for &q in &assigned {
        for k in 0..ns {
            complicating.push((q, k));
        }
    }

    let mut master = LinearProgram::new();
    let mut x_ids = Vec::with_capacity(complicating.len());
    for &(q, k) in &complicating {
        let slot = &instance.qubit_slots()[q];
        let demand = space.scenarios[k].qubits[slot.request][slot.circuit_local];
        let cap = instance.machine(slot).qubit_capacity;
        let id = master.add_var(
            format!("xuqt[{q},s{k}]"),
            VarKind::Integer,
            0.0,
            demand.min(cap) as f64,
        )?;
        master.set_objective_coef(
            id,
            space.scenarios[k].probability * instance.qubit_slot_cost(slot).utilize,
        );
        x_ids.push(id);
    }
    let theta = master.add_var("theta", VarKind::Continuous, 0.0, f64::INFINITY)?;
    master.set_objective_coef(theta, 1.0);
    // Reservation-level proxies and the static reservation floor, mirroring
    // the pair master on qubit prices.
    let mut level_terms: Vec<(VarId, f64)> = Vec::new();
    for &q in &assigned {
        let slot = &instance.qubit_slots()[q];
        let u = master.add_var(
            format!("level[{q}]"),
            VarKind::Continuous,
            0.0,
            instance.machine(slot).qubit_capacity as f64,
        )?;
        for (ci, &(cq, _)) in complicating.iter().enumerate() {
            if cq == q {
                master.add_constraint(
                    format!("level_cap[{ci}]"),
                    &[(x_ids[ci], 1.0), (u, -1.0)],
                    Sense::Le,
                    0.0,
                )?;
            }
        }
        level_terms.push((u, -instance.qubit_slot_cost(slot).reserve));
    }
    if !level_terms.is_empty() {
        let terms: Vec<(VarId, f64)> = std::iter::once((theta, 1.0))
            .chain(level_terms.iter().copied())
            .collect();
        master.add_constraint("res_floor", &terms, Sense::Ge, 0.0)?;
    }
    // Stabilizer: on-demand shortfall plus the assignment's fixed penalties.
    let stabilizer = {
        let mut terms = vec![(theta, 1.0)];
        terms.extend(level_terms.iter().copied());
        let mut rhs = 0.0;
        for (ci, &(q, k)) in complicating.iter().enumerate() {
            let slot = &instance.qubit_slots()[q];
            let cost = instance.qubit_slot_cost(slot);
            let prob = space.scenarios[k].probability;
            let demand = space.scenarios[k].qubits[slot.request][slot.circuit_local] as f64;
            let wait = space.scenarios[k].wait[slot.request][slot.circuit_local];
            let overrun = (slot.execution_time - wait).max(0.0);
            terms.push((x_ids[ci], prob * cost.ondemand));
            rhs += prob * (cost.ondemand * demand + cost.overwait_penalty * overrun);
        }
        if terms.len() > 1 {
            (terms, rhs)
        } else {
            (Vec::new(), 0.0)
        }
    };

    let solve_tail = |fix: &[f64]| -> Result<TailSolve<QubitTail>, BendersError> {
        let mut s1 = LinearProgram::new();
        let mut rep_ids = Vec::with_capacity(assigned.len());
        for &q in &assigned {
            let slot = &instance.qubit_slots()[q];
            let id = s1.add_var(
                format!("xrqt[{q}]"),
                VarKind::Integer,
                0.0,
                instance.machine(slot).qubit_capacity as f64,
            )?;
            s1.set_objective_coef(id, instance.qubit_slot_cost(slot).reserve);
            rep_ids.push((q, id));
        }
        let mut fix_ids = Vec::with_capacity(complicating.len());
        for (ci, &(q, k)) in complicating.iter().enumerate() {
            let f = s1.add_var(
                format!("fix[{q},s{k}]"),
                VarKind::Continuous,
                fix[ci],
                fix[ci],
            )?;
            let (_, rep) = rep_ids.iter().find(|&&(rq, _)| rq == q).unwrap();
            s1.add_constraint(
                format!("cover[{ci}]"),
                &[(f, 1.0), (*rep, -1.0)],
                Sense::Le,
                0.0,
            )?;
            fix_ids.push(f);
        }
        let s1_lp = solve_lp(&s1)?;
        if s1_lp.status != LpStatus::Optimal {
            return Err(BendersError::SubproblemInfeasible { scenario: None });
        }
        let s1_mip = solve_milp(&s1, DEFAULT_GAP)?;
        if s1_mip.status != MilpStatus::Optimal {
            return Err(BendersError::SubproblemInfeasible { scenario: None });
        }
        let mut duals = vec![0.0; complicating.len()];
        for (ci, f) in fix_ids.iter().enumerate() {
            duals[ci] = s1_lp.reduced_costs[f.index()];
        }

        let per_scenario: Result<Vec<_>, BendersError> = (0..ns)
            .into_par_iter()
            .map(|k| {
                let mut s2 = LinearProgram::new();
                let mut entries = Vec::new();
                for (ci, &(q, sk)) in complicating.iter().enumerate() {
                    if sk != k {
                        continue;
                    }
                    let slot = &instance.qubit_slots()[q];
                    let cost = instance.qubit_slot_cost(slot);
                    let prob = space.scenarios[k].probability;
                    let demand = space.scenarios[k].qubits[slot.request][slot.circuit_local] as f64;
                    let wait = space.scenarios[k].wait[slot.request][slot.circuit_local];
                    let overrun = (slot.execution_time - wait).max(0.0);
                    let od = s2.add_var(format!("xoqt[{q}]"), VarKind::Integer, 0.0, demand)?;
                    s2.set_objective_coef(od, prob * cost.ondemand);
                    let ow =
                        s2.add_var(format!("yowt[{q}]"), VarKind::Continuous, overrun, overrun)?;
                    s2.set_objective_coef(ow, prob * cost.overwait_penalty);
                    let f =
                        s2.add_var(format!("fix[{q}]"), VarKind::Continuous, fix[ci], fix[ci])?;
                    if demand > 0.0 {
                        s2.add_constraint(
                            format!("cover[{q}]"),
                            &[(f, 1.0), (od, 1.0)],
                            Sense::Ge,
                            demand,
                        )?;
                    }
                    entries.push((ci, q, od, ow, f));
                }
                let lp = solve_lp(&s2)?;
                if lp.status != LpStatus::Optimal {
                    return Err(BendersError::SubproblemInfeasible { scenario: Some(k) });
                }
                let mip = solve_milp(&s2, DEFAULT_GAP)?;
                if mip.status != MilpStatus::Optimal {
                    return Err(BendersError::SubproblemInfeasible { scenario: Some(k) });
                }
                let scenario_duals: Vec<(usize, f64)> = entries
                    .iter()
                    .map(|&(ci, _, _, _, f)| (ci, lp.reduced_costs[f.index()]))
                    .collect();
                let values: Vec<(usize, u32, f64)> = entries
                    .iter()
                    .map(|&(_, q, od, ow, _)| {
                        let slot = &instance.qubit_slots()[q];
                        let wait = space.scenarios[k].wait[slot.request][slot.circuit_local];
                        let _ = ow;
                        (
                            q,
                            mip.values[od.index()].round() as u32,
                            (slot.execution_time - wait).max(0.0),
                        )
                    })
                    .collect();
                Ok((lp.objective, mip.objective, scenario_duals, values))
            })
            .collect();
        let per_scenario = per_scenario?;

        let mut lp_value = s1_lp.objective;
        let mut mip_value = s1_mip.objective;
        let nq = instance.qubit_slots().len();
        let mut ondemand = vec![vec![0u32; nq]; ns];
        let mut overwait = vec![vec![0.0; nq]; ns];
        for (k, (lp_obj, mip_obj, scenario_duals, values)) in per_scenario.iter().enumerate() {
            lp_value += lp_obj;
            mip_value += mip_obj;
            for &(ci, d) in scenario_duals {
                duals[ci] += d;
            }
            for &(q, od, ow) in values {
                ondemand[k][q] = od;
                overwait[k][q] = ow;
            }
        }
        let reserved: Vec<(usize, u32)> = rep_ids
            .iter()
            .map(|&(q, id)| (q, s1_mip.values[id.index()].round() as u32))
            .collect();
        Ok(TailSolve {
            lp_value,
            mip_value,
            duals,
            payload: QubitTail {
                reserved,
                ondemand,
                overwait,
            },
        })
    };

    let result = benders_loop(
        complicating.clone(),
        ns,
        config.epsilon_qubits,
        config.max_iterations,
        master,
        x_ids,
        theta,
        stabilizer,
        solve_tail,
    )?;

    let nq = instance.qubit_slots().len();
    let mut plan = QubitPhasePlan {
        assignment: assignment.to_vec(),
        qubits_reserved: vec![0; nq],
        qubits_utilized: vec![vec![0; nq]; ns],
        qubits_ondemand: result.best_payload.ondemand.clone(),
        overwait: result.best_payload.overwait.clone(),
        cost: result.state.best_objective,
    };
    for &(q, v) in &result.best_payload.reserved {
        plan.qubits_reserved[q] = v;
    }
    for (ci, &(q, k)) in result.state.complicating.iter().enumerate() {
        plan.qubits_utilized[k][q] = result.best_fix[ci].round() as u32;
    }
    Ok((plan, result.state))
}

/// Full decomposed solve: fix routes, run the pair and qubit loops
/// independently, and assemble the combined plan.
pub fn run_decomposed(
    instance: &Instance,
    space: &ScenarioSpace,
    config: &BendersConfig,
) -> Result<(PlanSolution, BendersReport), BendersError> {
    let routes = solve_routes(instance, space)?;
    let (pair_plan, pair_state) = solve_pair_benders(instance, space, config, &routes)?;
    let (qubit_plan, qubit_state) = solve_qubit_benders(instance, space, config)?;

    let ns = space.scenarios.len();
    let mut plan = PlanSolution::empty(instance, ns);
    plan.routes = pair_plan.routes;
    plan.pairs_reserved = pair_plan.pairs_reserved;
    plan.pairs_utilized = pair_plan.pairs_utilized;
    plan.pairs_ondemand = pair_plan.pairs_ondemand;
    plan.assignment = qubit_plan.assignment;
    plan.qubits_reserved = qubit_plan.qubits_reserved;
    plan.qubits_utilized = qubit_plan.qubits_utilized;
    plan.qubits_ondemand = qubit_plan.qubits_ondemand;
    plan.overwait = qubit_plan.overwait;
    plan.cost = evaluate_cost(&plan, instance, space).map_err(ModelError::from)?;

    Ok((
        plan,
        BendersReport {
            pairs: pair_state,
            qubits: qubit_state,
        },
    ))
}
