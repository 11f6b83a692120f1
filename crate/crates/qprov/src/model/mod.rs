//! Deterministic-equivalent formulation of the provisioning problem.
//!
//! The builder turns an instance plus scenario space into one MILP covering
//! both halves of the problem:
//!
//! * Pair side: binary route flags per (link, request) under unit-flow
//!   constraints; integer reserved / utilized / on-demand pair counts per
//!   phase. Fidelity demands become precomputed integer pair thresholds via
//!   the purification inverse, gated by the route flag so un-routed links
//!   carry no requirement.
//! * Qubit side: binary machine-assignment flags per (request, circuit,
//!   provider, machine); integer reserved / utilized / on-demand qubit
//!   counts; continuous over-waiting seconds charged on the assigned machine.
//!
//! Reservation variables are route-gated (`y_rep <= cap * w`), which makes
//! the bilinear route-times-reservation cost terms exact without auxiliary
//! product variables: on the gated feasible set `w * y_rep == y_rep`.

mod build;
mod extract;

pub(crate) use build::pair_thresholds;
pub use build::{build_model, build_model_with, ModelOptions, ModelParts};
pub use extract::{evaluate_first_stage_against, extract_solution, FirstStageScore};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::domain::{DomainError, Instance, PlanSolution, ScenarioSpace};
use crate::purify::PurifyError;
use crate::solver::{
    solve_milp, LinearProgram, MilpSolution, MilpStatus, SolverError, VarId, DEFAULT_GAP,
};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Purify(#[from] PurifyError),
    #[error("request {request}: no feasible route, blocked links: {}", blocking.join(", "))]
    NoFeasibleRoute {
        request: String,
        blocking: Vec<String>,
    },
    #[error("no provider can host circuits of request {0}")]
    NoProvider(String),
    #[error("model is infeasible")]
    Infeasible,
    #[error("model is unbounded")]
    Unbounded,
    #[error("solver stopped with status {0:?}")]
    NotOptimal(MilpStatus),
    #[error("could not reconstruct a route for request {0}")]
    RouteReconstruction(String),
    #[error("extracted plan cost {got} does not match solver objective {expected}")]
    CostMismatch { expected: f64, got: f64 },
    #[error("recourse infeasible in scenarios {0:?} (on-demand capacity exhausted)")]
    RecourseInfeasible(Vec<usize>),
}

/// Which demand realization the model optimizes against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelMode {
    /// Full scenario space with probability-weighted recourse.
    Stochastic,
    /// Demands replaced by probability-weighted means (qubit means rounded
    /// up); a single-scenario approximation.
    ExpectedValue,
    /// Demands pinned to one scenario, as if known in advance.
    PerfectInformation(usize),
}

/// Role of a solver variable in the formulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarKey {
    /// Route flag per pair slot.
    Route(usize),
    /// Reserved pairs per pair slot.
    PairsReserved(usize),
    /// Utilized pairs per (pair slot, scenario).
    PairsUtilized(usize, usize),
    /// On-demand pairs per (pair slot, scenario).
    PairsOndemand(usize, usize),
    /// Machine assignment flag per qubit slot (formulation auxiliary).
    Assign(usize),
    /// Reserved qubits per qubit slot.
    QubitsReserved(usize),
    /// Utilized qubits per (qubit slot, scenario).
    QubitsUtilized(usize, usize),
    /// On-demand qubits per (qubit slot, scenario).
    QubitsOndemand(usize, usize),
    /// Over-waiting seconds per (qubit slot, scenario).
    Overwait(usize, usize),
}

impl VarKey {
    /// Decision variables are the plan itself; auxiliaries only encode the
    /// formulation (machine assignment).
    pub fn is_decision(&self) -> bool {
        !matches!(self, VarKey::Assign(_))
    }
}

/// Bidirectional mapping between formulation roles and solver variables.
#[derive(Debug, Clone, Default)]
pub struct VariableMap {
    keys: Vec<VarKey>,
    ids: BTreeMap<VarKey, VarId>,
}

impl VariableMap {
    pub(crate) fn insert(&mut self, key: VarKey, id: VarId) {
        debug_assert_eq!(id.index(), self.keys.len());
        self.keys.push(key);
        self.ids.insert(key, id);
    }

    pub fn id(&self, key: VarKey) -> Option<VarId> {
        self.ids.get(&key).copied()
    }

    pub fn key(&self, id: VarId) -> VarKey {
        self.keys[id.index()]
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn decision_count(&self) -> usize {
        self.keys.iter().filter(|k| k.is_decision()).count()
    }

    pub fn auxiliary_count(&self) -> usize {
        self.keys.len() - self.decision_count()
    }
}

/// A built model ready to hand to the solver.
#[derive(Debug, Clone)]
pub struct PlannerModel {
    pub program: LinearProgram,
    pub vars: VariableMap,
    pub mode: ModelMode,
    /// The scenario space the model actually optimizes against (collapsed in
    /// expected-value mode, restricted in perfect-information mode).
    pub space: ScenarioSpace,
    /// Minimum pair count per (pair slot, scenario); `None` marks a link the
    /// request cannot use because purification cannot reach its target.
    pub pair_thresholds: Vec<Vec<Option<u32>>>,
    pub parts: ModelParts,
    num_requests: usize,
}

impl PlannerModel {
    /// Pair-count threshold a routed link must satisfy in a scenario.
    pub fn pair_threshold(&self, link: usize, request: usize, scenario: usize) -> Option<u32> {
        self.pair_thresholds[link * self.num_requests + request][scenario]
    }
}

/// A solved model: the extracted plan plus the raw solver result and the
/// model it came from.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub plan: PlanSolution,
    pub milp: MilpSolution,
    pub model: PlannerModel,
}

/// Builds and solves the deterministic equivalent in the given mode.
pub fn solve_mode(
    instance: &Instance,
    space: &ScenarioSpace,
    mode: ModelMode,
) -> Result<SolveOutcome, ModelError> {
    solve_mode_with(instance, space, mode, &ModelOptions::default())
}

pub fn solve_mode_with(
    instance: &Instance,
    space: &ScenarioSpace,
    mode: ModelMode,
    options: &ModelOptions,
) -> Result<SolveOutcome, ModelError> {
    let model = build_model_with(instance, space, mode, options)?;
    let milp = solve_milp(&model.program, DEFAULT_GAP)?;
    let plan = extract_solution(&milp, &model, instance)?;
    Ok(SolveOutcome { plan, milp, model })
}

/// Probability-weighted total of solving each scenario with demands known in
/// advance (the wait-and-see bound).
pub fn perfect_information_total(
    instance: &Instance,
    space: &ScenarioSpace,
) -> Result<f64, ModelError> {
    use rayon::prelude::*;
    let totals: Result<Vec<f64>, ModelError> = (0..space.scenarios.len())
        .into_par_iter()
        .map(|k| {
            solve_mode(instance, space, ModelMode::PerfectInformation(k))
                .map(|out| out.plan.cost.total)
        })
        .collect();
    let totals = totals?;
    Ok(totals
        .iter()
        .zip(&space.scenarios)
        .map(|(t, s)| t * s.probability)
        .sum())
}
