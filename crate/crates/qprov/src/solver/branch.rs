//! Branch and bound over the simplex relaxation.
//!
//! Node selection is best-bound (smallest relaxation objective first, node id
//! as tie-break), branching picks the most fractional integer variable. Both
//! rules are deterministic, so identical programs explore identical trees.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{
    simplex, LinearProgram, LpStatus, MilpSolution, MilpStatus, SolverError, VarKind, INT_TOL,
};

#[derive(Debug, Clone)]
pub struct MilpOptions {
    /// Relative gap at which an incumbent counts as optimal.
    pub gap_tolerance: f64,
    /// Absolute gap at which an incumbent counts as optimal; an incumbent
    /// within `max(gap_tolerance * |incumbent|, absolute_gap)` of the best
    /// bound stops the search.
    pub absolute_gap: f64,
    /// Maximum nodes to explore before giving up with the best incumbent.
    pub node_limit: usize,
}

impl Default for MilpOptions {
    fn default() -> Self {
        Self {
            gap_tolerance: super::DEFAULT_GAP,
            absolute_gap: 0.0,
            node_limit: 200_000,
        }
    }
}

struct Node {
    bound: f64,
    id: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for Node {}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert so the smallest bound pops first.
        // Ties go to the newest node: on bound plateaus this dives for an
        // incumbent instead of sweeping the frontier breadth-first.
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| self.id.cmp(&other.id))
    }
}
impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn most_fractional(program: &LinearProgram, int_vars: &[usize], values: &[f64]) -> Option<usize> {
    let _ = program;
    let mut best: Option<(usize, f64)> = None;
    for &j in int_vars {
        let v = values[j];
        let frac = (v - v.round()).abs();
        if frac <= INT_TOL {
            continue;
        }
        // Distance to the nearest half-point: larger is more fractional.
        let score = 0.5 - (v - v.floor() - 0.5).abs();
        match best {
            Some((_, s)) if s >= score => {}
            _ => best = Some((j, score)),
        }
    }
    best.map(|(j, _)| j)
}

/// Rounds near-integral entries exactly and recomputes the objective, so
/// incumbents carry exact integers.
fn snap(program: &LinearProgram, int_vars: &[usize], values: &mut [f64]) -> f64 {
    for &j in int_vars {
        values[j] = values[j].round();
    }
    program.objective_value(values)
}

pub(crate) fn solve(
    program: &LinearProgram,
    options: &MilpOptions,
) -> Result<MilpSolution, SolverError> {
    let int_vars: Vec<usize> = program
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| matches!(v.kind, VarKind::Integer | VarKind::Binary))
        .map(|(j, _)| j)
        .collect();

    let mut relaxed = program.clone();
    let mut heap = BinaryHeap::new();
    heap.push(Node {
        bound: f64::NEG_INFINITY,
        id: 0,
        lower: program.vars.iter().map(|v| v.lower).collect(),
        upper: program.vars.iter().map(|v| v.upper).collect(),
    });

    let mut next_id = 1usize;
    let mut node_count = 0usize;
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut saw_feasible_relaxation = false;
    let mut hit_node_limit = false;

    // Smallest bound among subtrees discarded before being fully resolved;
    // the final proven bound is the minimum of this and the incumbent.
    let mut discarded_min = f64::INFINITY;
    while let Some(node) = heap.pop() {
        let gap_abs =
            |inc: f64| (options.gap_tolerance * inc.abs().max(1.0)).max(options.absolute_gap);
        if let Some((inc_obj, _)) = &incumbent {
            // Best-bound order: once the tightest remaining bound is within
            // the gap, every other open node is too.
            if node.bound >= inc_obj - gap_abs(*inc_obj) {
                discarded_min = discarded_min.min(node.bound);
                heap.clear();
                break;
            }
        }
        if node_count >= options.node_limit {
            hit_node_limit = true;
            break;
        }
        node_count += 1;

        for (j, v) in relaxed.vars.iter_mut().enumerate() {
            v.lower = node.lower[j];
            v.upper = node.upper[j];
        }
        let lp = simplex::solve(&relaxed)?;
        match lp.status {
            LpStatus::Infeasible => continue,
            LpStatus::Unbounded => {
                // A relaxation without a bound means the MILP has none either
                // (bounded integers would have bounded the relaxation).
                return Ok(MilpSolution {
                    status: MilpStatus::Unbounded,
                    values: Vec::new(),
                    objective: f64::NAN,
                    best_bound: f64::NEG_INFINITY,
                    node_count,
                    gap: f64::INFINITY,
                });
            }
            LpStatus::Optimal => {}
        }
        saw_feasible_relaxation = true;
        if let Some((inc_obj, _)) = &incumbent {
            if lp.objective >= inc_obj - gap_abs(*inc_obj) {
                discarded_min = discarded_min.min(lp.objective);
                continue;
            }
        }

        match most_fractional(program, &int_vars, &lp.values) {
            None => {
                let mut values = lp.values;
                let objective = snap(program, &int_vars, &mut values);
                match &incumbent {
                    Some((best, _)) if *best <= objective => {}
                    _ => incumbent = Some((objective, values)),
                }
            }
            Some(j) => {
                let x = lp.values[j];
                let floor = x.floor();
                // Down child: x <= floor.
                if floor >= node.lower[j] - 1e-9 {
                    let mut upper = node.upper.clone();
                    upper[j] = floor.min(node.upper[j]);
                    if upper[j] >= node.lower[j] {
                        heap.push(Node {
                            bound: lp.objective,
                            id: next_id,
                            lower: node.lower.clone(),
                            upper,
                        });
                        next_id += 1;
                    }
                }
                // Up child: x >= ceil.
                let ceil = floor + 1.0;
                if ceil <= node.upper[j] + 1e-9 {
                    let mut lower = node.lower.clone();
                    lower[j] = ceil.max(node.lower[j]);
                    if lower[j] <= node.upper[j] {
                        heap.push(Node {
                            bound: lp.objective,
                            id: next_id,
                            lower,
                            upper: node.upper.clone(),
                        });
                        next_id += 1;
                    }
                }
            }
        }
    }

    let open_min = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let floor = discarded_min.min(open_min);

    match incumbent {
        Some((objective, values)) => {
            let best_bound = objective.min(floor);
            let gap = ((objective - best_bound) / objective.abs().max(1.0)).max(0.0);
            let tolerated =
                gap <= options.gap_tolerance || objective - best_bound <= options.absolute_gap;
            let status = if hit_node_limit && !tolerated {
                MilpStatus::NodeLimit
            } else {
                MilpStatus::Optimal
            };
            Ok(MilpSolution {
                status,
                values,
                objective,
                best_bound,
                node_count,
                gap,
            })
        }
        None => {
            let status = if hit_node_limit {
                MilpStatus::NodeLimit
            } else {
                // Relaxations may have been feasible, but no integral point
                // exists in any explored box; with the tree exhausted that
                // means integer-infeasible.
                let _ = saw_feasible_relaxation;
                MilpStatus::Infeasible
            };
            Ok(MilpSolution {
                status,
                values: Vec::new(),
                objective: f64::NAN,
                best_bound: floor,
                node_count,
                gap: f64::INFINITY,
            })
        }
    }
}
