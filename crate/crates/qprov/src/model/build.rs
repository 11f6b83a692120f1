//! Model construction.

use std::collections::VecDeque;

use crate::domain::{Instance, ScenarioSpace};
use crate::purify::min_pairs_for_target;
use crate::solver::{LinearProgram, Sense, VarId, VarKind};

use super::{ModelError, ModelMode, PlannerModel, VarKey, VariableMap};

/// Which halves of the formulation to include. The two halves share no
/// constraints, so they can be built and solved independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelParts {
    pub pairs: bool,
    pub qubits: bool,
}

impl Default for ModelParts {
    fn default() -> Self {
        Self {
            pairs: true,
            qubits: true,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ModelOptions {
    pub parts: ModelParts,
    /// Pins the reserved pair count on every routed link to this level
    /// (used by reserved-pair sweeps).
    pub forced_reservation: Option<u32>,
}

/// Minimum pair count per (pair slot, scenario): the smallest chain on the
/// link meeting both the request's tightest circuit demand and the link
/// threshold, within the link's total pair budget. `None` marks a link the
/// request cannot use in that scenario.
pub(crate) fn pair_thresholds(
    instance: &Instance,
    space: &ScenarioSpace,
) -> Result<Vec<Vec<Option<u32>>>, ModelError> {
    let ns = space.scenarios.len();
    let mut thresholds = Vec::with_capacity(instance.pair_slots().len());
    for slot in instance.pair_slots() {
        let link = instance.topology.link(slot.link);
        let budget = link.reserve_capacity + link.ondemand_capacity;
        let mut per_scenario = Vec::with_capacity(ns);
        for k in 0..ns {
            let demand = space.max_fidelity_demand(k, slot.request);
            let target = demand.max(link.fidelity_threshold);
            let need = if budget == 0 {
                None
            } else {
                min_pairs_for_target(link.base_fidelity, target, budget)?
            };
            per_scenario.push(need);
        }
        thresholds.push(per_scenario);
    }
    Ok(thresholds)
}

/// Builds the deterministic-equivalent MILP for the given mode.
pub fn build_model(
    instance: &Instance,
    space: &ScenarioSpace,
    mode: ModelMode,
) -> Result<PlannerModel, ModelError> {
    build_model_with(instance, space, mode, &ModelOptions::default())
}

pub fn build_model_with(
    instance: &Instance,
    space: &ScenarioSpace,
    mode: ModelMode,
    options: &ModelOptions,
) -> Result<PlannerModel, ModelError> {
    let effective = match mode {
        ModelMode::Stochastic => space.clone(),
        ModelMode::ExpectedValue => space.collapse_expected(),
        ModelMode::PerfectInformation(k) => space.restricted_to(k),
    };
    let ns = effective.scenarios.len();
    let topo = &instance.topology;
    let nr = instance.requests.len();

    let thresholds = pair_thresholds(instance, &effective)?;
    let blocked: Vec<bool> = thresholds
        .iter()
        .map(|per| per.iter().any(|t| t.is_none()))
        .collect();

    if options.parts.pairs {
        // Every request must still reach its destination over usable links.
        for (r, req) in instance.requests.iter().enumerate() {
            let mut seen = vec![false; topo.nodes().len()];
            let mut queue = VecDeque::from([req.source]);
            seen[req.source] = true;
            while let Some(n) = queue.pop_front() {
                for &l in topo.outgoing(n) {
                    if blocked[instance.pair_slot_index(l, r)] {
                        continue;
                    }
                    let to = topo.link(l).to;
                    if !seen[to] {
                        seen[to] = true;
                        queue.push_back(to);
                    }
                }
            }
            if !seen[req.destination] {
                let blocking = (0..topo.links().len())
                    .filter(|&l| blocked[instance.pair_slot_index(l, r)])
                    .map(|l| topo.link_name(l))
                    .collect();
                return Err(ModelError::NoFeasibleRoute {
                    request: req.id.clone(),
                    blocking,
                });
            }
        }
    }

    let mut program = LinearProgram::new();
    let mut vars = VariableMap::default();
    let add = |program: &mut LinearProgram,
               vars: &mut VariableMap,
               key: VarKey,
               name: String,
               kind: VarKind,
               lo: f64,
               hi: f64|
     -> Result<VarId, ModelError> {
        let id = program.add_var(name, kind, lo, hi)?;
        vars.insert(key, id);
        Ok(id)
    };

    if options.parts.pairs {
        // Route flags and reservations.
        for (s, slot) in instance.pair_slots().iter().enumerate() {
            let name = format!(
                "w[{},{}]",
                topo.link_name(slot.link),
                instance.requests[slot.request].id
            );
            let hi = if blocked[s] { 0.0 } else { 1.0 };
            add(
                &mut program,
                &mut vars,
                VarKey::Route(s),
                name,
                VarKind::Binary,
                0.0,
                hi,
            )?;
        }
        for (s, slot) in instance.pair_slots().iter().enumerate() {
            let link = topo.link(slot.link);
            let name = format!(
                "yrep[{},{}]",
                topo.link_name(slot.link),
                instance.requests[slot.request].id
            );
            let mut cap = link.reserve_capacity as f64;
            if let Some(v) = options.forced_reservation {
                cap = cap.min(v as f64);
            }
            if blocked[s] {
                cap = 0.0;
            }
            let id = add(
                &mut program,
                &mut vars,
                VarKey::PairsReserved(s),
                name,
                VarKind::Integer,
                0.0,
                cap,
            )?;
            program.set_objective_coef(id, instance.pair_first_stage_price(slot));
        }
        for k in 0..ns {
            let prob = effective.scenarios[k].probability;
            for (s, slot) in instance.pair_slots().iter().enumerate() {
                let link = topo.link(slot.link);
                let cost = instance.pair_slot_cost(slot);
                let tag = format!(
                    "{},{},s{k}",
                    topo.link_name(slot.link),
                    instance.requests[slot.request].id
                );
                let cap_u = if blocked[s] {
                    0.0
                } else {
                    link.reserve_capacity as f64
                };
                let id = add(
                    &mut program,
                    &mut vars,
                    VarKey::PairsUtilized(s, k),
                    format!("yeep[{tag}]"),
                    VarKind::Integer,
                    0.0,
                    cap_u,
                )?;
                program.set_objective_coef(id, prob * cost.utilize);
                let cap_o = if blocked[s] {
                    0.0
                } else {
                    link.ondemand_capacity as f64
                };
                let id = add(
                    &mut program,
                    &mut vars,
                    VarKey::PairsOndemand(s, k),
                    format!("yoep[{tag}]"),
                    VarKind::Integer,
                    0.0,
                    cap_o,
                )?;
                program.set_objective_coef(id, prob * cost.ondemand);
            }
        }

        // Unit flow: one outgoing route at the source, one incoming at the
        // destination, conservation elsewhere, at most one departure per node.
        for (r, req) in instance.requests.iter().enumerate() {
            let flow_terms = |node: usize, vars: &VariableMap| {
                let mut terms = Vec::new();
                for &l in topo.outgoing(node) {
                    terms.push((
                        vars.id(VarKey::Route(instance.pair_slot_index(l, r)))
                            .unwrap(),
                        1.0,
                    ));
                }
                for &l in topo.incoming(node) {
                    terms.push((
                        vars.id(VarKey::Route(instance.pair_slot_index(l, r)))
                            .unwrap(),
                        -1.0,
                    ));
                }
                terms
            };
            program.add_constraint(
                format!("flow_src[{}]", req.id),
                &flow_terms(req.source, &vars),
                Sense::Eq,
                1.0,
            )?;
            program.add_constraint(
                format!("flow_dst[{}]", req.id),
                &flow_terms(req.destination, &vars),
                Sense::Eq,
                -1.0,
            )?;
            for n in 0..topo.nodes().len() {
                if n == req.source || n == req.destination {
                    continue;
                }
                let terms = flow_terms(n, &vars);
                if terms.is_empty() {
                    continue;
                }
                program.add_constraint(
                    format!("flow_mid[{},{}]", topo.node(n).id, req.id),
                    &terms,
                    Sense::Eq,
                    0.0,
                )?;
            }
            for n in 0..topo.nodes().len() {
                let terms: Vec<_> = topo
                    .outgoing(n)
                    .iter()
                    .map(|&l| {
                        (
                            vars.id(VarKey::Route(instance.pair_slot_index(l, r)))
                                .unwrap(),
                            1.0,
                        )
                    })
                    .collect();
                if terms.len() > 1 {
                    program.add_constraint(
                        format!("degree[{},{}]", topo.node(n).id, req.id),
                        &terms,
                        Sense::Le,
                        1.0,
                    )?;
                }
            }
        }

        // Reservation gated by routing and capped per link across requests.
        for (s, slot) in instance.pair_slots().iter().enumerate() {
            if blocked[s] {
                continue;
            }
            let link = topo.link(slot.link);
            let tag = format!(
                "{},{}",
                topo.link_name(slot.link),
                instance.requests[slot.request].id
            );
            let w = vars.id(VarKey::Route(s)).unwrap();
            let y = vars.id(VarKey::PairsReserved(s)).unwrap();
            program.add_constraint(
                format!("res_gate[{tag}]"),
                &[(y, 1.0), (w, -(link.reserve_capacity as f64))],
                Sense::Le,
                0.0,
            )?;
            if let Some(v) = options.forced_reservation {
                program.add_constraint(
                    format!("res_force[{tag}]"),
                    &[(y, 1.0), (w, -(v as f64))],
                    Sense::Ge,
                    0.0,
                )?;
            }
        }
        for (l, link) in topo.links().iter().enumerate() {
            let terms: Vec<_> = (0..nr)
                .filter(|&r| !blocked[instance.pair_slot_index(l, r)])
                .map(|r| {
                    (
                        vars.id(VarKey::PairsReserved(instance.pair_slot_index(l, r)))
                            .unwrap(),
                        1.0,
                    )
                })
                .collect();
            if terms.len() > 1 {
                program.add_constraint(
                    format!("res_cap[{}]", topo.link_name(l)),
                    &terms,
                    Sense::Le,
                    link.reserve_capacity as f64,
                )?;
            }
        }

        // Utilization within reservation; fidelity thresholds when routed;
        // shared on-demand capacity per scenario.
        for k in 0..ns {
            for (s, slot) in instance.pair_slots().iter().enumerate() {
                if blocked[s] {
                    continue;
                }
                let tag = format!(
                    "{},{},s{k}",
                    topo.link_name(slot.link),
                    instance.requests[slot.request].id
                );
                let yrep = vars.id(VarKey::PairsReserved(s)).unwrap();
                let yeep = vars.id(VarKey::PairsUtilized(s, k)).unwrap();
                let yoep = vars.id(VarKey::PairsOndemand(s, k)).unwrap();
                program.add_constraint(
                    format!("util_le_res[{tag}]"),
                    &[(yeep, 1.0), (yrep, -1.0)],
                    Sense::Le,
                    0.0,
                )?;
                let need = thresholds[s][k].expect("unblocked slot has thresholds") as f64;
                let w = vars.id(VarKey::Route(s)).unwrap();
                program.add_constraint(
                    format!("fidelity[{tag}]"),
                    &[(yeep, 1.0), (yoep, 1.0), (w, -need)],
                    Sense::Ge,
                    0.0,
                )?;
            }
            for (l, link) in topo.links().iter().enumerate() {
                let terms: Vec<_> = (0..nr)
                    .filter(|&r| !blocked[instance.pair_slot_index(l, r)])
                    .map(|r| {
                        (
                            vars.id(VarKey::PairsOndemand(instance.pair_slot_index(l, r), k))
                                .unwrap(),
                            1.0,
                        )
                    })
                    .collect();
                if terms.len() > 1 {
                    program.add_constraint(
                        format!("od_cap[{},s{k}]", topo.link_name(l)),
                        &terms,
                        Sense::Le,
                        link.ondemand_capacity as f64,
                    )?;
                }
            }
        }
    }

    if options.parts.qubits {
        for (r, req) in instance.requests.iter().enumerate() {
            if !req.circuits.is_empty() && !instance.qubit_slots().iter().any(|q| q.request == r) {
                return Err(ModelError::NoProvider(req.id.clone()));
            }
        }

        let slot_tag = |q: usize| -> String {
            let slot = &instance.qubit_slots()[q];
            format!(
                "{},{},{},{}",
                instance.circuits[slot.circuit],
                instance.providers[slot.provider].id,
                instance.providers[slot.provider].machines[slot.machine].id,
                instance.requests[slot.request].id
            )
        };

        for (q, _) in instance.qubit_slots().iter().enumerate() {
            add(
                &mut program,
                &mut vars,
                VarKey::Assign(q),
                format!("a[{}]", slot_tag(q)),
                VarKind::Binary,
                0.0,
                1.0,
            )?;
        }
        for (q, slot) in instance.qubit_slots().iter().enumerate() {
            let cap = instance.machine(slot).qubit_capacity as f64;
            let id = add(
                &mut program,
                &mut vars,
                VarKey::QubitsReserved(q),
                format!("xrqt[{}]", slot_tag(q)),
                VarKind::Integer,
                0.0,
                cap,
            )?;
            program.set_objective_coef(id, instance.qubit_slot_cost(slot).reserve);
        }
        for k in 0..ns {
            let prob = effective.scenarios[k].probability;
            for (q, slot) in instance.qubit_slots().iter().enumerate() {
                let cost = instance.qubit_slot_cost(slot);
                let demand = effective.scenarios[k].qubits[slot.request][slot.circuit_local] as f64;
                let wait = effective.scenarios[k].wait[slot.request][slot.circuit_local];
                let overrun = (slot.execution_time - wait).max(0.0);
                let tag = format!("{},s{k}", slot_tag(q));
                let id = add(
                    &mut program,
                    &mut vars,
                    VarKey::QubitsUtilized(q, k),
                    format!("xuqt[{tag}]"),
                    VarKind::Integer,
                    0.0,
                    instance.machine(slot).qubit_capacity as f64,
                )?;
                program.set_objective_coef(id, prob * cost.utilize);
                let id = add(
                    &mut program,
                    &mut vars,
                    VarKey::QubitsOndemand(q, k),
                    format!("xoqt[{tag}]"),
                    VarKind::Integer,
                    0.0,
                    demand,
                )?;
                program.set_objective_coef(id, prob * cost.ondemand);
                let id = add(
                    &mut program,
                    &mut vars,
                    VarKey::Overwait(q, k),
                    format!("yowt[{tag}]"),
                    VarKind::Continuous,
                    0.0,
                    overrun,
                )?;
                program.set_objective_coef(id, prob * cost.overwait_penalty);
            }
        }

        // Every circuit runs on exactly one machine; reservations and
        // on-demand top-ups are tied to it.
        for (r, req) in instance.requests.iter().enumerate() {
            for (cl, &c) in req.circuits.iter().enumerate() {
                let slots: Vec<usize> = instance
                    .qubit_slots()
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| s.request == r && s.circuit_local == cl)
                    .map(|(q, _)| q)
                    .collect();
                let terms: Vec<_> = slots
                    .iter()
                    .map(|&q| (vars.id(VarKey::Assign(q)).unwrap(), 1.0))
                    .collect();
                program.add_constraint(
                    format!("assign_one[{},{}]", instance.circuits[c], req.id),
                    &terms,
                    Sense::Eq,
                    1.0,
                )?;
            }
        }
        for (q, slot) in instance.qubit_slots().iter().enumerate() {
            let a = vars.id(VarKey::Assign(q)).unwrap();
            let xr = vars.id(VarKey::QubitsReserved(q)).unwrap();
            program.add_constraint(
                format!("res_gate_q[{}]", slot_tag(q)),
                &[
                    (xr, 1.0),
                    (a, -(instance.machine(slot).qubit_capacity as f64)),
                ],
                Sense::Le,
                0.0,
            )?;
        }
        for k in 0..ns {
            for (q, slot) in instance.qubit_slots().iter().enumerate() {
                let tag = format!("{},s{k}", slot_tag(q));
                let a = vars.id(VarKey::Assign(q)).unwrap();
                let xr = vars.id(VarKey::QubitsReserved(q)).unwrap();
                let xu = vars.id(VarKey::QubitsUtilized(q, k)).unwrap();
                let xo = vars.id(VarKey::QubitsOndemand(q, k)).unwrap();
                let ow = vars.id(VarKey::Overwait(q, k)).unwrap();
                program.add_constraint(
                    format!("util_le_res_q[{tag}]"),
                    &[(xu, 1.0), (xr, -1.0)],
                    Sense::Le,
                    0.0,
                )?;
                let demand = effective.scenarios[k].qubits[slot.request][slot.circuit_local] as f64;
                if demand > 0.0 {
                    program.add_constraint(
                        format!("od_gate_q[{tag}]"),
                        &[(xo, 1.0), (a, -demand)],
                        Sense::Le,
                        0.0,
                    )?;
                }
                let wait = effective.scenarios[k].wait[slot.request][slot.circuit_local];
                let overrun = slot.execution_time - wait;
                if overrun > 0.0 {
                    program.add_constraint(
                        format!("overwait[{tag}]"),
                        &[(ow, 1.0), (a, -overrun)],
                        Sense::Ge,
                        0.0,
                    )?;
                }
            }
            for (r, req) in instance.requests.iter().enumerate() {
                for (cl, &c) in req.circuits.iter().enumerate() {
                    let demand = effective.scenarios[k].qubits[r][cl] as f64;
                    if demand <= 0.0 {
                        continue;
                    }
                    let mut terms = Vec::new();
                    for (q, slot) in instance.qubit_slots().iter().enumerate() {
                        if slot.request == r && slot.circuit_local == cl {
                            terms.push((vars.id(VarKey::QubitsUtilized(q, k)).unwrap(), 1.0));
                            terms.push((vars.id(VarKey::QubitsOndemand(q, k)).unwrap(), 1.0));
                        }
                    }
                    program.add_constraint(
                        format!("coverage[{},{},s{k}]", instance.circuits[c], req.id),
                        &terms,
                        Sense::Ge,
                        demand,
                    )?;
                }
            }
        }
    }

    Ok(PlannerModel {
        program,
        vars,
        mode,
        space: effective,
        pair_thresholds: thresholds,
        parts: options.parts,
        num_requests: nr,
    })
}
