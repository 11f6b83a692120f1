//! Provisioning planner for quantum cloud computing.
//!
//! The planner jointly decides entanglement routes, entangled-pair counts and
//! qubit counts across the reservation / utilization / on-demand phases of a
//! quantum cloud, under uncertain fidelity, qubit and waiting-time demands.
//! The underlying two-stage stochastic program is solved both directly (as a
//! deterministic-equivalent MILP) and by Benders decomposition, on top of a
//! self-contained bounded-simplex / branch-and-bound engine.
//!
//! Module map:
//! - [`domain`]: instance data (topology, providers, costs, requests,
//!   scenarios), parsing, and plan cost evaluation,
//! - [`purify`]: the entanglement purification chain and its inverse,
//! - [`qft`]: QFT gate counting and execution-time estimates,
//! - [`solver`]: LP (simplex with duals) and MILP (branch and bound),
//! - [`model`]: deterministic-equivalent formulation and plan extraction,
//! - [`benders`]: the decomposed solve with optimality cuts,
//! - [`experiments`]: bundled NSFNET preset, sweeps, model comparisons.

pub mod benders;
pub mod domain;
pub mod experiments;
pub mod model;
pub mod purify;
pub mod qft;
pub mod solver;

pub use benders::{BendersConfig, BendersReport, BendersState, Cut};
pub use domain::{
    CostBreakdown, CostModel, Instance, Machine, NetworkTopology, PlanSolution, Provider,
    QuantumLink, QuantumNode, Request, Scenario, ScenarioSpace,
};
pub use model::{ModelMode, PlannerModel, VariableMap};
pub use solver::{LinearProgram, LpSolution, LpStatus, MilpSolution, MilpStatus};
