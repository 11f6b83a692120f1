//! Self-contained LP and MILP engine.
//!
//! The LP path is a bounded-variable two-phase primal simplex that reports
//! dual values and reduced costs; the MILP path is branch-and-bound on top of
//! it. Both are deterministic: identical programs produce identical solutions
//! across runs (fixed pivot and branching rules, no randomization).

mod branch;
mod lpwrite;
mod simplex;

use std::fmt;

use thiserror::Error;

pub use branch::MilpOptions;
pub use lpwrite::write_lp_format;

/// Feasibility tolerance on constraint activities and variable bounds.
pub const FEAS_TOL: f64 = 1e-7;
/// Tolerance under which a value counts as integral.
pub const INT_TOL: f64 = 1e-6;
/// Default relative optimality gap for MILP solves.
pub const DEFAULT_GAP: f64 = 1e-6;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
pub const DEGENERATE_PIVOT_LIMIT: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid program: {0}")]
    InvalidProgram(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Integer,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sense::Le => write!(f, "<="),
            Sense::Ge => write!(f, ">="),
            Sense::Eq => write!(f, "="),
        }
    }
}

/// Handle to a declared variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Constraint {
    pub name: String,
    /// Sorted by variable index, one term per variable.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A linear program in minimize form: variables with bounds and kinds, linear
/// constraints, and a linear objective. Immutable once handed to a solver.
#[derive(Debug, Clone, Default)]
pub struct LinearProgram {
    pub(crate) vars: Vec<Variable>,
    pub(crate) cons: Vec<Constraint>,
    pub(crate) objective: Vec<f64>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, SolverError> {
        let name = name.into();
        if lower.is_nan() || upper.is_nan() || lower == f64::INFINITY || upper == f64::NEG_INFINITY
        {
            return Err(SolverError::InvalidProgram(format!(
                "variable {name} has bounds [{lower}, {upper}]"
            )));
        }
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            _ => (lower, upper),
        };
        if lower > upper {
            return Err(SolverError::InvalidProgram(format!(
                "variable {name} has lower {lower} > upper {upper}"
            )));
        }
        self.vars.push(Variable {
            name,
            kind,
            lower,
            upper,
        });
        self.objective.push(0.0);
        Ok(VarId(self.vars.len() - 1))
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: &[(VarId, f64)],
        sense: Sense,
        rhs: f64,
    ) -> Result<usize, SolverError> {
        let name = name.into();
        if !rhs.is_finite() {
            return Err(SolverError::InvalidProgram(format!(
                "constraint {name} has rhs {rhs}"
            )));
        }
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for &(v, c) in terms {
            if v.0 >= self.vars.len() {
                return Err(SolverError::InvalidProgram(format!(
                    "constraint {name} references unknown variable id {}",
                    v.0
                )));
            }
            if !c.is_finite() {
                return Err(SolverError::InvalidProgram(format!(
                    "constraint {name} has coefficient {c}"
                )));
            }
            merged.push((v.0, c));
        }
        merged.sort_by_key(|&(v, _)| v);
        merged.dedup_by(|later, earlier| {
            if later.0 == earlier.0 {
                earlier.1 += later.1;
                true
            } else {
                false
            }
        });
        merged.retain(|&(_, c)| c != 0.0);
        self.cons.push(Constraint {
            name,
            terms: merged,
            sense,
            rhs,
        });
        Ok(self.cons.len() - 1)
    }

    pub fn set_objective_coef(&mut self, var: VarId, coef: f64) {
        self.objective[var.0] = coef;
    }

    pub fn add_objective_coef(&mut self, var: VarId, coef: f64) {
        self.objective[var.0] += coef;
    }

    pub fn objective_coef(&self, var: VarId) -> f64 {
        self.objective[var.0]
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.vars.len()).map(VarId)
    }

    pub fn num_constraints(&self) -> usize {
        self.cons.len()
    }

    pub fn var_name(&self, var: VarId) -> &str {
        &self.vars[var.0].name
    }

    pub fn var_bounds(&self, var: VarId) -> (f64, f64) {
        (self.vars[var.0].lower, self.vars[var.0].upper)
    }

    pub fn var_kind(&self, var: VarId) -> VarKind {
        self.vars[var.0].kind
    }

    pub fn set_var_bounds(
        &mut self,
        var: VarId,
        lower: f64,
        upper: f64,
    ) -> Result<(), SolverError> {
        if lower > upper || lower.is_nan() || upper.is_nan() {
            return Err(SolverError::InvalidProgram(format!(
                "variable {} rebound to [{lower}, {upper}]",
                self.vars[var.0].name
            )));
        }
        self.vars[var.0].lower = lower;
        self.vars[var.0].upper = upper;
        Ok(())
    }

    pub fn constraint_name(&self, idx: usize) -> &str {
        &self.cons[idx].name
    }

    pub fn constraint_rhs(&self, idx: usize) -> f64 {
        self.cons[idx].rhs
    }

    pub fn constraint_sense(&self, idx: usize) -> Sense {
        self.cons[idx].sense
    }

    pub fn constraint_terms(&self, idx: usize) -> impl Iterator<Item = (VarId, f64)> + '_ {
        self.cons[idx].terms.iter().map(|&(v, c)| (VarId(v), c))
    }

    /// Index of the first constraint with this exact name, if any.
    pub fn find_constraint(&self, name: &str) -> Option<usize> {
        self.cons.iter().position(|c| c.name == name)
    }

    /// Activity of constraint `idx` at the given point.
    pub fn constraint_activity(&self, idx: usize, values: &[f64]) -> f64 {
        self.cons[idx]
            .terms
            .iter()
            .map(|&(v, c)| c * values[v])
            .sum()
    }

    /// Objective value at the given point.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, x)| c * x).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of a continuous solve. Integrality markers are ignored (relaxed).
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal value per variable; empty unless optimal.
    pub values: Vec<f64>,
    /// Dual value per constraint, signed as objective sensitivity to the
    /// right-hand side; empty unless optimal.
    pub duals: Vec<f64>,
    /// Reduced cost per variable; the sensitivity of the objective to the
    /// bound a nonbasic variable sits at. Empty unless optimal.
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// Node limit hit; `values` hold the best incumbent found, if any.
    NodeLimit,
}

#[derive(Debug, Clone)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// Incumbent values; integer variables hold exact integers.
    pub values: Vec<f64>,
    pub objective: f64,
    /// Proven lower bound on the optimum (minimization); equals the
    /// objective when the tree was exhausted.
    pub best_bound: f64,
    /// Branch-and-bound nodes explored, root included.
    pub node_count: usize,
    /// Relative gap between incumbent and best remaining bound.
    pub gap: f64,
}

/// Solves the continuous relaxation of `program`.
pub fn solve_lp(program: &LinearProgram) -> Result<LpSolution, SolverError> {
    simplex::solve(program)
}

/// Solves `program` as a MILP to the given relative gap tolerance.
pub fn solve_milp(
    program: &LinearProgram,
    gap_tolerance: f64,
) -> Result<MilpSolution, SolverError> {
    branch::solve(
        program,
        &MilpOptions {
            gap_tolerance,
            ..MilpOptions::default()
        },
    )
}

/// Solves with full control over branch-and-bound options.
pub fn solve_milp_with(
    program: &LinearProgram,
    options: &MilpOptions,
) -> Result<MilpSolution, SolverError> {
    branch::solve(program, options)
}
