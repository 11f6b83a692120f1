//! Mapping solver output back into plans, and re-scoring frozen first-stage
//! decisions against a scenario space.

use crate::domain::{evaluate_cost, Instance, PlanSolution, ScenarioSpace};
use crate::solver::{
    solve_milp, LinearProgram, MilpSolution, MilpStatus, Sense, VarId, VarKind, DEFAULT_GAP,
};

use super::{ModelError, PlannerModel, VarKey};

fn value_of(model: &PlannerModel, values: &[f64], key: VarKey) -> f64 {
    model
        .vars
        .id(key)
        .map(|id| values[id.index()])
        .unwrap_or(0.0)
}

fn count_of(model: &PlannerModel, values: &[f64], key: VarKey) -> u32 {
    value_of(model, values, key).round().max(0.0) as u32
}

/// Reads a MILP solution back into a plan, prunes value-free leftovers on
/// un-routed links and un-assigned machines, prices the plan, and checks the
/// result against the solver's objective.
pub fn extract_solution(
    milp: &MilpSolution,
    model: &PlannerModel,
    instance: &Instance,
) -> Result<PlanSolution, ModelError> {
    match milp.status {
        MilpStatus::Optimal => {}
        MilpStatus::Infeasible => return Err(ModelError::Infeasible),
        MilpStatus::Unbounded => return Err(ModelError::Unbounded),
        other => return Err(ModelError::NotOptimal(other)),
    }
    let ns = model.space.scenarios.len();
    let mut plan = PlanSolution::empty(instance, ns);
    let values = &milp.values;

    if model.parts.pairs {
        for s in 0..instance.pair_slots().len() {
            plan.routes[s] = value_of(model, values, VarKey::Route(s)) > 0.5;
            if !plan.routes[s] {
                continue;
            }
            plan.pairs_reserved[s] = count_of(model, values, VarKey::PairsReserved(s));
            for k in 0..ns {
                plan.pairs_utilized[k][s] = count_of(model, values, VarKey::PairsUtilized(s, k));
                plan.pairs_ondemand[k][s] = count_of(model, values, VarKey::PairsOndemand(s, k));
            }
        }
        for (r, req) in instance.requests.iter().enumerate() {
            walk_route(&plan, instance, r)
                .ok_or_else(|| ModelError::RouteReconstruction(req.id.clone()))?;
        }
    }
    if model.parts.qubits {
        for (q, slot) in instance.qubit_slots().iter().enumerate() {
            plan.assignment[q] = value_of(model, values, VarKey::Assign(q)) > 0.5;
            if !plan.assignment[q] {
                continue;
            }
            plan.qubits_reserved[q] = count_of(model, values, VarKey::QubitsReserved(q));
            for k in 0..ns {
                plan.qubits_utilized[k][q] = count_of(model, values, VarKey::QubitsUtilized(q, k));
                plan.qubits_ondemand[k][q] = count_of(model, values, VarKey::QubitsOndemand(q, k));
                // Over-waiting on the assigned machine is pinned by data, so
                // snap past the solver's continuous-arithmetic noise.
                let wait = model.space.scenarios[k].wait[slot.request][slot.circuit_local];
                plan.overwait[k][q] = (slot.execution_time - wait).max(0.0);
            }
        }
    }

    plan.cost = evaluate_cost(&plan, instance, &model.space)?;
    if (plan.cost.total - milp.objective).abs() > 1e-5 {
        return Err(ModelError::CostMismatch {
            expected: milp.objective,
            got: plan.cost.total,
        });
    }
    Ok(plan)
}

/// Follows routed links from the request's source; returns the link sequence
/// if it forms a path ending at the destination.
pub(crate) fn walk_route(
    plan: &PlanSolution,
    instance: &Instance,
    request: usize,
) -> Option<Vec<usize>> {
    let topo = &instance.topology;
    let req = &instance.requests[request];
    let mut path = Vec::new();
    let mut node = req.source;
    let mut visited = vec![false; topo.nodes().len()];
    loop {
        if node == req.destination {
            return Some(path);
        }
        if visited[node] {
            return None;
        }
        visited[node] = true;
        let mut next = None;
        for &l in topo.outgoing(node) {
            if plan.routes[instance.pair_slot_index(l, request)] {
                if next.is_some() {
                    return None;
                }
                next = Some(l);
            }
        }
        let l = next?;
        path.push(l);
        node = topo.link(l).to;
    }
}

/// Expected totals of a frozen first stage re-scored against `space`.
#[derive(Debug, Clone)]
pub struct FirstStageScore {
    pub first_stage: f64,
    pub expected_second_stage: f64,
    pub total: f64,
    /// Unweighted recourse cost per scenario.
    pub per_scenario: Vec<f64>,
    /// The frozen plan completed with re-optimized recourse decisions.
    pub plan: PlanSolution,
}

/// Freezes the first-stage decisions of `plan` (routes, pair reservations,
/// machine assignment, qubit reservations) and re-optimizes every scenario's
/// recourse against `space`.
///
/// A scenario is infeasible only when the frozen routes cannot meet its pair
/// thresholds within on-demand capacity; those scenario ids are reported.
pub fn evaluate_first_stage_against(
    plan: &PlanSolution,
    instance: &Instance,
    space: &ScenarioSpace,
) -> Result<FirstStageScore, ModelError> {
    let ns = space.scenarios.len();
    let thresholds = super::build::pair_thresholds(instance, space)?;

    let mut completed = PlanSolution::empty(instance, ns);
    completed.routes = plan.routes.clone();
    completed.pairs_reserved = plan.pairs_reserved.clone();
    completed.assignment = plan.assignment.clone();
    completed.qubits_reserved = plan.qubits_reserved.clone();

    let mut infeasible = Vec::new();
    for k in 0..ns {
        if !recourse_for_scenario(&mut completed, instance, space, &thresholds, k)? {
            infeasible.push(k);
        }
    }
    if !infeasible.is_empty() {
        return Err(ModelError::RecourseInfeasible(infeasible));
    }

    let cost = evaluate_cost(&completed, instance, space)?;
    completed.cost = cost.clone();
    Ok(FirstStageScore {
        first_stage: cost.first_stage,
        expected_second_stage: cost.second_stage_expected,
        total: cost.total,
        per_scenario: cost.per_scenario.clone(),
        plan: completed,
    })
}

/// Solves one scenario's recourse with the first stage frozen, writing the
/// results into `completed`. Returns false when infeasible.
fn recourse_for_scenario(
    completed: &mut PlanSolution,
    instance: &Instance,
    space: &ScenarioSpace,
    thresholds: &[Vec<Option<u32>>],
    k: usize,
) -> Result<bool, ModelError> {
    let topo = &instance.topology;
    let mut program = LinearProgram::new();
    let mut yeep: Vec<Option<VarId>> = vec![None; instance.pair_slots().len()];
    let mut yoep: Vec<Option<VarId>> = vec![None; instance.pair_slots().len()];

    for (s, slot) in instance.pair_slots().iter().enumerate() {
        if !completed.routes[s] {
            continue;
        }
        let link = topo.link(slot.link);
        let need = match thresholds[s][k] {
            Some(n) => n as f64,
            // A routed link whose target is unreachable by purification can
            // never satisfy this scenario.
            None => return Ok(false),
        };
        let cost = instance.pair_slot_cost(slot);
        let ue = program.add_var(
            format!("yeep[{s}]"),
            VarKind::Integer,
            0.0,
            completed.pairs_reserved[s].min(link.reserve_capacity) as f64,
        )?;
        program.set_objective_coef(ue, cost.utilize);
        let oe = program.add_var(
            format!("yoep[{s}]"),
            VarKind::Integer,
            0.0,
            link.ondemand_capacity as f64,
        )?;
        program.set_objective_coef(oe, cost.ondemand);
        program.add_constraint(
            format!("fid[{s}]"),
            &[(ue, 1.0), (oe, 1.0)],
            Sense::Ge,
            need,
        )?;
        yeep[s] = Some(ue);
        yoep[s] = Some(oe);
    }
    for (l, link) in topo.links().iter().enumerate() {
        let terms: Vec<_> = (0..instance.requests.len())
            .filter_map(|r| yoep[instance.pair_slot_index(l, r)].map(|id| (id, 1.0)))
            .collect();
        if terms.len() > 1 {
            program.add_constraint(
                format!("od_cap[{l}]"),
                &terms,
                Sense::Le,
                link.ondemand_capacity as f64,
            )?;
        }
    }

    let mut xuqt: Vec<Option<VarId>> = vec![None; instance.qubit_slots().len()];
    let mut xoqt: Vec<Option<VarId>> = vec![None; instance.qubit_slots().len()];
    let mut owt: Vec<Option<VarId>> = vec![None; instance.qubit_slots().len()];
    for (q, slot) in instance.qubit_slots().iter().enumerate() {
        if !completed.assignment[q] {
            continue;
        }
        let cost = instance.qubit_slot_cost(slot);
        let demand = space.scenarios[k].qubits[slot.request][slot.circuit_local] as f64;
        let wait = space.scenarios[k].wait[slot.request][slot.circuit_local];
        let cap_u = completed.qubits_reserved[q].min(instance.machine(slot).qubit_capacity) as f64;
        let xu = program.add_var(format!("xuqt[{q}]"), VarKind::Integer, 0.0, cap_u)?;
        program.set_objective_coef(xu, cost.utilize);
        let xo = program.add_var(format!("xoqt[{q}]"), VarKind::Integer, 0.0, demand)?;
        program.set_objective_coef(xo, cost.ondemand);
        let overrun = (slot.execution_time - wait).max(0.0);
        let ow = program.add_var(format!("yowt[{q}]"), VarKind::Continuous, overrun, overrun)?;
        program.set_objective_coef(ow, cost.overwait_penalty);
        if demand > 0.0 {
            program.add_constraint(
                format!("cover[{q}]"),
                &[(xu, 1.0), (xo, 1.0)],
                Sense::Ge,
                demand,
            )?;
        }
        xuqt[q] = Some(xu);
        xoqt[q] = Some(xo);
        owt[q] = Some(ow);
    }

    let milp = solve_milp(&program, DEFAULT_GAP)?;
    match milp.status {
        MilpStatus::Optimal => {}
        MilpStatus::Infeasible => return Ok(false),
        other => return Err(ModelError::NotOptimal(other)),
    }
    for s in 0..instance.pair_slots().len() {
        if let Some(id) = yeep[s] {
            completed.pairs_utilized[k][s] = milp.values[id.index()].round() as u32;
        }
        if let Some(id) = yoep[s] {
            completed.pairs_ondemand[k][s] = milp.values[id.index()].round() as u32;
        }
    }
    for q in 0..instance.qubit_slots().len() {
        if let Some(id) = xuqt[q] {
            completed.qubits_utilized[k][q] = milp.values[id.index()].round() as u32;
        }
        if let Some(id) = xoqt[q] {
            completed.qubits_ondemand[k][q] = milp.values[id.index()].round() as u32;
        }
        if owt[q].is_some() {
            let slot = &instance.qubit_slots()[q];
            let wait = space.scenarios[k].wait[slot.request][slot.circuit_local];
            completed.overwait[k][q] = (slot.execution_time - wait).max(0.0);
        }
    }
    Ok(true)
}
