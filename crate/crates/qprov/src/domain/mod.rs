//! Instance data for the planner: network topology, providers, requests,
//! prices, demand scenarios, and plan solutions with their cost breakdown.
//!
//! Everything here is immutable after construction and safe to share across
//! worker threads; construction itself is single-threaded.

mod parse;
mod scenario;

pub use parse::{parse_scenario_sets, ParsedFile};
pub use scenario::{
    build_scenario_space, DemandSets, IntValueSet, Scenario, ScenarioSpace, ValueSet,
};

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("{file} line {line}: {message}")]
    Parse {
        file: ParsedFile,
        line: usize,
        message: String,
    },
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("index mismatch: {0}")]
    IndexMismatch(String),
}

/// A quantum node; repeaters charge per reserved pair routed through them.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumNode {
    pub id: String,
    /// Energy cost per reserved pair on incoming routed links.
    pub energy_cost: f64,
    /// Repeater setup cost per reserved pair on incoming routed links.
    pub repeater_setup_cost: f64,
}

/// A directed link. An undirected fiber is stored as two directed links that
/// happen to share capacity figures; flow constraints are directed.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumLink {
    pub from: usize,
    pub to: usize,
    /// Fidelity of every entangled pair generated on this link, in (0, 1].
    pub base_fidelity: f64,
    /// Minimum fidelity any routed traffic must reach on this link.
    pub fidelity_threshold: f64,
    /// Pair capacity of the reservation phase.
    pub reserve_capacity: u32,
    /// Pair capacity of the on-demand phase.
    pub ondemand_capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkTopology {
    nodes: Vec<QuantumNode>,
    links: Vec<QuantumLink>,
    node_index: BTreeMap<String, usize>,
    incoming: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
}

impl NetworkTopology {
    pub fn builder() -> TopologyBuilder {
        TopologyBuilder::default()
    }

    pub fn nodes(&self) -> &[QuantumNode] {
        &self.nodes
    }

    pub fn links(&self) -> &[QuantumLink] {
        &self.links
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        self.node_index.get(id).copied()
    }

    pub fn node(&self, idx: usize) -> &QuantumNode {
        &self.nodes[idx]
    }

    pub fn link(&self, idx: usize) -> &QuantumLink {
        &self.links[idx]
    }

    /// Links arriving at `node`.
    pub fn incoming(&self, node: usize) -> &[usize] {
        &self.incoming[node]
    }

    /// Links leaving `node`.
    pub fn outgoing(&self, node: usize) -> &[usize] {
        &self.outgoing[node]
    }

    pub fn link_name(&self, idx: usize) -> String {
        let l = &self.links[idx];
        format!("{}->{}", self.nodes[l.from].id, self.nodes[l.to].id)
    }

    /// Number of undirected fibers, counting a directed pair once.
    pub fn undirected_link_count(&self) -> usize {
        let mut count = 0;
        for (i, l) in self.links.iter().enumerate() {
            let reverse_earlier = self.links[..i]
                .iter()
                .any(|r| r.from == l.to && r.to == l.from);
            if !reverse_earlier {
                count += 1;
            }
        }
        count
    }
}

#[derive(Debug, Default)]
pub struct TopologyBuilder {
    nodes: Vec<QuantumNode>,
    node_index: BTreeMap<String, usize>,
    links: Vec<(String, String, QuantumLinkParams)>,
    errors: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct QuantumLinkParams {
    pub base_fidelity: f64,
    pub fidelity_threshold: f64,
    pub reserve_capacity: u32,
    pub ondemand_capacity: u32,
}

impl TopologyBuilder {
    pub fn node(
        mut self,
        id: impl Into<String>,
        energy_cost: f64,
        repeater_setup_cost: f64,
    ) -> Self {
        let id = id.into();
        if self.node_index.contains_key(&id) {
            self.errors.push(format!("duplicate node id {id}"));
            return self;
        }
        if energy_cost < 0.0 || repeater_setup_cost < 0.0 {
            self.errors.push(format!("node {id} has a negative cost"));
            return self;
        }
        self.node_index.insert(id.clone(), self.nodes.len());
        self.nodes.push(QuantumNode {
            id,
            energy_cost,
            repeater_setup_cost,
        });
        self
    }

    /// Adds a single directed link.
    pub fn directed_link(
        mut self,
        from: impl Into<String>,
        to: impl Into<String>,
        params: QuantumLinkParams,
    ) -> Self {
        self.links.push((from.into(), to.into(), params));
        self
    }

    /// Adds both directions of an undirected fiber.
    pub fn link(
        self,
        a: impl Into<String>,
        b: impl Into<String>,
        params: QuantumLinkParams,
    ) -> Self {
        let (a, b) = (a.into(), b.into());
        self.directed_link(a.clone(), b.clone(), params)
            .directed_link(b, a, params)
    }

    pub fn build(self) -> Result<NetworkTopology, DomainError> {
        if let Some(e) = self.errors.first() {
            return Err(DomainError::Invalid(e.clone()));
        }
        let mut topo = NetworkTopology {
            nodes: self.nodes,
            links: Vec::with_capacity(self.links.len()),
            node_index: self.node_index,
            incoming: Vec::new(),
            outgoing: Vec::new(),
        };
        topo.incoming = vec![Vec::new(); topo.nodes.len()];
        topo.outgoing = vec![Vec::new(); topo.nodes.len()];
        for (from, to, p) in self.links {
            let from_idx = *topo
                .node_index
                .get(&from)
                .ok_or_else(|| DomainError::Invalid(format!("unknown node {from} in link")))?;
            let to_idx = *topo
                .node_index
                .get(&to)
                .ok_or_else(|| DomainError::Invalid(format!("unknown node {to} in link")))?;
            if from_idx == to_idx {
                return Err(DomainError::Invalid(format!("self-loop on node {from}")));
            }
            if !(p.base_fidelity > 0.0 && p.base_fidelity <= 1.0) {
                return Err(DomainError::Invalid(format!(
                    "link {from}->{to}: base fidelity {} outside (0, 1]",
                    p.base_fidelity
                )));
            }
            if !(p.fidelity_threshold > 0.0 && p.fidelity_threshold <= 1.0) {
                return Err(DomainError::Invalid(format!(
                    "link {from}->{to}: fidelity threshold {} outside (0, 1]",
                    p.fidelity_threshold
                )));
            }
            let idx = topo.links.len();
            topo.links.push(QuantumLink {
                from: from_idx,
                to: to_idx,
                base_fidelity: p.base_fidelity,
                fidelity_threshold: p.fidelity_threshold,
                reserve_capacity: p.reserve_capacity,
                ondemand_capacity: p.ondemand_capacity,
            });
            topo.outgoing[from_idx].push(idx);
            topo.incoming[to_idx].push(idx);
        }
        Ok(topo)
    }
}

/// A quantum computer of a provider.
#[derive(Debug, Clone, PartialEq)]
pub struct Machine {
    pub id: String,
    pub qubit_capacity: u32,
    /// Execution time in seconds per (request id, circuit id).
    pub execution_time: BTreeMap<(String, String), f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Provider {
    pub id: String,
    pub machines: Vec<Machine>,
}

/// A user request: route one entanglement connection from source to
/// destination and run its circuits somewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub id: String,
    pub source: usize,
    pub destination: usize,
    /// Indices into [`Instance::circuits`].
    pub circuits: Vec<usize>,
}

/// Reservation / utilization / on-demand prices for entangled pairs.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseCost {
    pub reserve: f64,
    pub utilize: f64,
    pub ondemand: f64,
}

/// Qubit prices plus the over-waiting penalty per second.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QubitCost {
    pub reserve: f64,
    pub utilize: f64,
    pub ondemand: f64,
    pub overwait_penalty: f64,
}

/// Fully resolved price tables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CostModel {
    /// Pair prices indexed `[node][request]`.
    pub pair: Vec<Vec<PhaseCost>>,
    /// Qubit prices indexed `[circuit][provider]`.
    pub qubit: Vec<Vec<QubitCost>>,
}

impl CostModel {
    pub fn pair_cost(&self, node: usize, request: usize) -> &PhaseCost {
        &self.pair[node][request]
    }

    pub fn qubit_cost(&self, circuit: usize, provider: usize) -> &QubitCost {
        &self.qubit[circuit][provider]
    }
}

/// One (link, request) pairing; pair-phase decisions live on these.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairSlot {
    pub link: usize,
    pub request: usize,
}

/// One (request, circuit, provider, machine) pairing; qubit-phase decisions
/// live on these.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitSlot {
    pub request: usize,
    /// Position of the circuit within the request's circuit list.
    pub circuit_local: usize,
    /// Index into [`Instance::circuits`].
    pub circuit: usize,
    pub provider: usize,
    pub machine: usize,
    /// Execution time of this circuit on this machine, in seconds.
    pub execution_time: f64,
}

/// A complete, validated planning instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub topology: NetworkTopology,
    pub providers: Vec<Provider>,
    pub requests: Vec<Request>,
    pub costs: CostModel,
    /// Global circuit id table, in order of first appearance.
    pub circuits: Vec<String>,
    pair_slots: Vec<PairSlot>,
    qubit_slots: Vec<QubitSlot>,
}

impl Instance {
    /// Assembles and validates an instance from parts. Machine execution-time
    /// maps must cover every (request, circuit) they can host.
    pub fn assemble(
        topology: NetworkTopology,
        providers: Vec<Provider>,
        requests: Vec<Request>,
        circuits: Vec<String>,
        costs: CostModel,
    ) -> Result<Self, DomainError> {
        for r in &requests {
            if r.source == r.destination {
                return Err(DomainError::Invalid(format!(
                    "request {}: source equals destination",
                    r.id
                )));
            }
            if r.source >= topology.nodes.len() || r.destination >= topology.nodes.len() {
                return Err(DomainError::Invalid(format!(
                    "request {}: endpoint outside topology",
                    r.id
                )));
            }
            for &c in &r.circuits {
                if c >= circuits.len() {
                    return Err(DomainError::Invalid(format!(
                        "request {}: unknown circuit index {c}",
                        r.id
                    )));
                }
            }
        }
        for p in &providers {
            if p.machines.is_empty() {
                return Err(DomainError::Invalid(format!(
                    "provider {} has no machines",
                    p.id
                )));
            }
            for m in &p.machines {
                if m.qubit_capacity < 1 {
                    return Err(DomainError::Invalid(format!(
                        "machine {}:{} has zero qubit capacity",
                        p.id, m.id
                    )));
                }
            }
        }
        if costs.pair.len() != topology.nodes.len()
            || costs.pair.iter().any(|row| row.len() != requests.len())
        {
            return Err(DomainError::Invalid(
                "pair cost table shape does not match nodes x requests".into(),
            ));
        }
        if costs.qubit.len() != circuits.len()
            || costs.qubit.iter().any(|row| row.len() != providers.len())
        {
            return Err(DomainError::Invalid(
                "qubit cost table shape does not match circuits x providers".into(),
            ));
        }
        for row in &costs.pair {
            for c in row {
                if c.reserve < 0.0 || c.utilize < 0.0 || c.ondemand < 0.0 {
                    return Err(DomainError::Invalid("negative pair cost".into()));
                }
            }
        }
        for row in &costs.qubit {
            for c in row {
                if c.reserve < 0.0
                    || c.utilize < 0.0
                    || c.ondemand < 0.0
                    || c.overwait_penalty < 0.0
                {
                    return Err(DomainError::Invalid("negative qubit cost".into()));
                }
            }
        }

        let mut pair_slots = Vec::with_capacity(topology.links.len() * requests.len());
        for link in 0..topology.links.len() {
            for request in 0..requests.len() {
                pair_slots.push(PairSlot { link, request });
            }
        }
        let mut qubit_slots = Vec::new();
        for (ri, r) in requests.iter().enumerate() {
            for (cl, &c) in r.circuits.iter().enumerate() {
                for (pi, p) in providers.iter().enumerate() {
                    for (mi, m) in p.machines.iter().enumerate() {
                        let key = (r.id.clone(), circuits[c].clone());
                        let exe = *m.execution_time.get(&key).ok_or_else(|| {
                            DomainError::Invalid(format!(
                                "missing execution time for circuit {} of request {} on {}:{}",
                                circuits[c], r.id, p.id, m.id
                            ))
                        })?;
                        if exe < 0.0 {
                            return Err(DomainError::Invalid(format!(
                                "negative execution time on {}:{}",
                                p.id, m.id
                            )));
                        }
                        qubit_slots.push(QubitSlot {
                            request: ri,
                            circuit_local: cl,
                            circuit: c,
                            provider: pi,
                            machine: mi,
                            execution_time: exe,
                        });
                    }
                }
            }
        }

        Ok(Self {
            topology,
            providers,
            requests,
            costs,
            circuits,
            pair_slots,
            qubit_slots,
        })
    }

    /// Parses and validates the three instance files.
    pub fn parse(
        topology_text: &str,
        costs_text: &str,
        requests_text: &str,
    ) -> Result<Self, DomainError> {
        parse::parse_instance(topology_text, costs_text, requests_text)
    }

    /// Renders the instance back into (topology, costs, requests) texts that
    /// parse to an identical instance.
    pub fn to_texts(&self) -> (String, String, String) {
        parse::serialize_instance(self)
    }

    pub fn pair_slots(&self) -> &[PairSlot] {
        &self.pair_slots
    }

    pub fn qubit_slots(&self) -> &[QubitSlot] {
        &self.qubit_slots
    }

    pub fn pair_slot_index(&self, link: usize, request: usize) -> usize {
        link * self.requests.len() + request
    }

    /// Head-node pair prices for a slot, as charged by the objective.
    pub fn pair_slot_cost(&self, slot: &PairSlot) -> &PhaseCost {
        let node = self.topology.links[slot.link].to;
        self.costs.pair_cost(node, slot.request)
    }

    pub fn qubit_slot_cost(&self, slot: &QubitSlot) -> &QubitCost {
        self.costs.qubit_cost(slot.circuit, slot.provider)
    }

    /// Per-pair first-stage price on a routed link: head-node energy and
    /// repeater setup plus the reservation price.
    pub fn pair_first_stage_price(&self, slot: &PairSlot) -> f64 {
        let head = &self.topology.nodes[self.topology.links[slot.link].to];
        head.energy_cost + head.repeater_setup_cost + self.pair_slot_cost(slot).reserve
    }

    pub fn machine(&self, slot: &QubitSlot) -> &Machine {
        &self.providers[slot.provider].machines[slot.machine]
    }

    /// Restriction to the first `n` requests (costs and slots rebuilt).
    pub fn with_requests(&self, n: usize) -> Result<Self, DomainError> {
        if n > self.requests.len() {
            return Err(DomainError::Invalid(format!(
                "instance has {} requests, asked for {n}",
                self.requests.len()
            )));
        }
        let requests: Vec<Request> = self.requests[..n].to_vec();
        let costs = CostModel {
            pair: self
                .costs
                .pair
                .iter()
                .map(|row| row[..n].to_vec())
                .collect(),
            qubit: self.costs.qubit.clone(),
        };
        Self::assemble(
            self.topology.clone(),
            self.providers.clone(),
            requests,
            self.circuits.clone(),
            costs,
        )
    }
}

/// Complete first- plus second-stage decision assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanSolution {
    /// Route flag per pair slot.
    pub routes: Vec<bool>,
    /// Reserved pairs per pair slot.
    pub pairs_reserved: Vec<u32>,
    /// Utilized pairs, `[scenario][pair_slot]`.
    pub pairs_utilized: Vec<Vec<u32>>,
    /// On-demand pairs, `[scenario][pair_slot]`.
    pub pairs_ondemand: Vec<Vec<u32>>,
    /// Machine assignment flag per qubit slot.
    pub assignment: Vec<bool>,
    /// Reserved qubits per qubit slot.
    pub qubits_reserved: Vec<u32>,
    /// Utilized qubits, `[scenario][qubit_slot]`.
    pub qubits_utilized: Vec<Vec<u32>>,
    /// On-demand qubits, `[scenario][qubit_slot]`.
    pub qubits_ondemand: Vec<Vec<u32>>,
    /// Over-waiting seconds, `[scenario][qubit_slot]`.
    pub overwait: Vec<Vec<f64>>,
    pub cost: CostBreakdown,
}

impl PlanSolution {
    pub fn empty(instance: &Instance, scenarios: usize) -> Self {
        let np = instance.pair_slots.len();
        let nq = instance.qubit_slots.len();
        Self {
            routes: vec![false; np],
            pairs_reserved: vec![0; np],
            pairs_utilized: vec![vec![0; np]; scenarios],
            pairs_ondemand: vec![vec![0; np]; scenarios],
            assignment: vec![false; nq],
            qubits_reserved: vec![0; nq],
            qubits_utilized: vec![vec![0; nq]; scenarios],
            qubits_ondemand: vec![vec![0; nq]; scenarios],
            overwait: vec![vec![0.0; nq]; scenarios],
            cost: CostBreakdown::default(),
        }
    }

    /// Links routed for `request`, in instance link order.
    pub fn routed_links(&self, instance: &Instance, request: usize) -> Vec<usize> {
        (0..instance.topology.links().len())
            .filter(|&l| self.routes[instance.pair_slot_index(l, request)])
            .collect()
    }
}

/// First-stage, per-scenario and expected cost components of a plan.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CostBreakdown {
    pub first_stage: f64,
    pub first_stage_pairs: f64,
    pub first_stage_qubits: f64,
    pub second_stage_expected: f64,
    pub second_stage_pairs_expected: f64,
    pub second_stage_qubits_expected: f64,
    /// Unweighted second-stage cost of each scenario.
    pub per_scenario: Vec<f64>,
    pub total: f64,
}

/// Prices a complete plan against an instance and scenario space.
pub fn evaluate_cost(
    solution: &PlanSolution,
    instance: &Instance,
    space: &ScenarioSpace,
) -> Result<CostBreakdown, DomainError> {
    let np = instance.pair_slots.len();
    let nq = instance.qubit_slots.len();
    let ns = space.scenarios.len();
    let shape_ok = solution.routes.len() == np
        && solution.pairs_reserved.len() == np
        && solution.assignment.len() == nq
        && solution.qubits_reserved.len() == nq
        && solution.pairs_utilized.len() == ns
        && solution.pairs_ondemand.len() == ns
        && solution.qubits_utilized.len() == ns
        && solution.qubits_ondemand.len() == ns
        && solution.overwait.len() == ns
        && solution.pairs_utilized.iter().all(|v| v.len() == np)
        && solution.pairs_ondemand.iter().all(|v| v.len() == np)
        && solution.qubits_utilized.iter().all(|v| v.len() == nq)
        && solution.qubits_ondemand.iter().all(|v| v.len() == nq)
        && solution.overwait.iter().all(|v| v.len() == nq);
    if !shape_ok {
        return Err(DomainError::IndexMismatch(
            "solution shape does not match instance and scenario space".into(),
        ));
    }

    let mut first_pairs = 0.0;
    for (s, slot) in instance.pair_slots.iter().enumerate() {
        let reserved = solution.pairs_reserved[s] as f64;
        if reserved == 0.0 {
            continue;
        }
        let head = &instance.topology.nodes[instance.topology.links[slot.link].to];
        let routed = if solution.routes[s] { 1.0 } else { 0.0 };
        let cost = instance.pair_slot_cost(slot);
        first_pairs += (head.energy_cost + head.repeater_setup_cost) * routed * reserved
            + cost.reserve * reserved;
    }
    let mut first_qubits = 0.0;
    for (s, slot) in instance.qubit_slots.iter().enumerate() {
        first_qubits += solution.qubits_reserved[s] as f64 * instance.qubit_slot_cost(slot).reserve;
    }

    let mut per_scenario = Vec::with_capacity(ns);
    let mut second_pairs = 0.0;
    let mut second_qubits = 0.0;
    for (k, scenario) in space.scenarios.iter().enumerate() {
        let mut pairs = 0.0;
        for (s, slot) in instance.pair_slots.iter().enumerate() {
            let cost = instance.pair_slot_cost(slot);
            pairs += cost.utilize * solution.pairs_utilized[k][s] as f64
                + cost.ondemand * solution.pairs_ondemand[k][s] as f64;
        }
        let mut qubits = 0.0;
        for (s, slot) in instance.qubit_slots.iter().enumerate() {
            let cost = instance.qubit_slot_cost(slot);
            qubits += cost.utilize * solution.qubits_utilized[k][s] as f64
                + cost.ondemand * solution.qubits_ondemand[k][s] as f64
                + cost.overwait_penalty * solution.overwait[k][s];
        }
        per_scenario.push(pairs + qubits);
        second_pairs += scenario.probability * pairs;
        second_qubits += scenario.probability * qubits;
    }

    let first_stage = first_pairs + first_qubits;
    let second_stage = second_pairs + second_qubits;
    Ok(CostBreakdown {
        first_stage,
        first_stage_pairs: first_pairs,
        first_stage_qubits: first_qubits,
        second_stage_expected: second_stage,
        second_stage_pairs_expected: second_pairs,
        second_stage_qubits_expected: second_qubits,
        per_scenario,
        total: first_stage + second_stage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link_params() -> QuantumLinkParams {
        QuantumLinkParams {
            base_fidelity: 0.9,
            fidelity_threshold: 0.8,
            reserve_capacity: 9,
            ondemand_capacity: 60,
        }
    }

    fn machine(id: &str, cap: u32, exe: &[((&str, &str), f64)]) -> Machine {
        Machine {
            id: id.into(),
            qubit_capacity: cap,
            execution_time: exe
                .iter()
                .map(|((r, c), t)| ((r.to_string(), c.to_string()), *t))
                .collect(),
        }
    }

    fn tiny_instance() -> Instance {
        let topology = NetworkTopology::builder()
            .node("1", 5.0, 151.0)
            .node("2", 5.0, 151.0)
            .node("3", 5.0, 151.0)
            .directed_link("1", "2", link_params())
            .directed_link("2", "3", link_params())
            .build()
            .unwrap();
        let providers = vec![Provider {
            id: "p1".into(),
            machines: vec![machine("m1", 30, &[(("r1", "c1"), 0.004)])],
        }];
        let requests = vec![Request {
            id: "r1".into(),
            source: 0,
            destination: 2,
            circuits: vec![0],
        }];
        let costs = CostModel {
            pair: vec![
                vec![PhaseCost {
                    reserve: 10.0,
                    utilize: 1.0,
                    ondemand: 200.0,
                }];
                3
            ],
            qubit: vec![vec![QubitCost {
                reserve: 1.68,
                utilize: 0.1,
                ondemand: 7.0,
                overwait_penalty: 10.0,
            }]],
        };
        Instance::assemble(topology, providers, requests, vec!["c1".into()], costs).unwrap()
    }

    #[test]
    fn adjacency_is_consistent() {
        let inst = tiny_instance();
        let topo = &inst.topology;
        assert_eq!(topo.outgoing(0), &[0]);
        assert_eq!(topo.incoming(1), &[0]);
        assert_eq!(topo.outgoing(1), &[1]);
        assert_eq!(topo.incoming(2), &[1]);
        assert!(topo.incoming(0).is_empty());
        assert_eq!(topo.undirected_link_count(), 2);
    }

    #[test]
    fn builder_rejects_bad_input() {
        let dup = NetworkTopology::builder()
            .node("a", 0.0, 0.0)
            .node("a", 0.0, 0.0)
            .build();
        assert!(dup.is_err());
        let self_loop = NetworkTopology::builder()
            .node("a", 0.0, 0.0)
            .directed_link("a", "a", link_params())
            .build();
        assert!(self_loop.is_err());
        let bad_f = NetworkTopology::builder()
            .node("a", 0.0, 0.0)
            .node("b", 0.0, 0.0)
            .directed_link(
                "a",
                "b",
                QuantumLinkParams {
                    base_fidelity: 1.2,
                    ..link_params()
                },
            )
            .build();
        assert!(bad_f.is_err());
    }

    #[test]
    fn zero_plan_costs_nothing() {
        let inst = tiny_instance();
        let space = ScenarioSpace::degenerate(&inst);
        let plan = PlanSolution::empty(&inst, 1);
        let cost = evaluate_cost(&plan, &inst, &space).unwrap();
        assert_eq!(cost.total, 0.0);
        assert_eq!(cost.first_stage, 0.0);
    }

    #[test]
    fn first_stage_pair_pricing() {
        // One routed link carrying 9 reserved pairs at the published node
        // prices: (5 + 151) * 9 + 10 * 9 = 1494.
        let inst = tiny_instance();
        let space = ScenarioSpace::degenerate(&inst);
        let mut plan = PlanSolution::empty(&inst, 1);
        let slot = inst.pair_slot_index(0, 0);
        plan.routes[slot] = true;
        plan.pairs_reserved[slot] = 9;
        let cost = evaluate_cost(&plan, &inst, &space).unwrap();
        assert_eq!(cost.first_stage, 1494.0);
        assert_eq!(cost.total, 1494.0);
    }

    #[test]
    fn first_stage_qubit_pricing() {
        // 10 reserved qubits at 1.68 each.
        let inst = tiny_instance();
        let space = ScenarioSpace::degenerate(&inst);
        let mut plan = PlanSolution::empty(&inst, 1);
        plan.qubits_reserved[0] = 10;
        let cost = evaluate_cost(&plan, &inst, &space).unwrap();
        assert!((cost.first_stage - 16.8).abs() < 1e-12);
    }

    #[test]
    fn cost_is_linear_in_prices() {
        let inst = tiny_instance();
        let space = ScenarioSpace::degenerate(&inst);
        let mut plan = PlanSolution::empty(&inst, 1);
        let slot = inst.pair_slot_index(1, 0);
        plan.routes[slot] = true;
        plan.pairs_reserved[slot] = 3;
        plan.pairs_utilized[0][slot] = 2;
        plan.pairs_ondemand[0][slot] = 1;
        plan.qubits_reserved[0] = 4;
        plan.qubits_utilized[0][0] = 3;
        plan.overwait[0][0] = 0.5;
        let base = evaluate_cost(&plan, &inst, &space).unwrap();

        let mut scaled = inst.clone();
        for row in &mut scaled.costs.pair {
            for c in row {
                c.reserve *= 3.0;
                c.utilize *= 3.0;
                c.ondemand *= 3.0;
            }
        }
        for row in &mut scaled.costs.qubit {
            for c in row {
                c.reserve *= 3.0;
                c.utilize *= 3.0;
                c.ondemand *= 3.0;
                c.overwait_penalty *= 3.0;
            }
        }
        for n in 0..scaled.topology.nodes.len() {
            scaled.topology.nodes[n].energy_cost *= 3.0;
            scaled.topology.nodes[n].repeater_setup_cost *= 3.0;
        }
        let tripled = evaluate_cost(&plan, &scaled, &space).unwrap();
        assert!((tripled.total - 3.0 * base.total).abs() < 1e-9);
        assert!((tripled.first_stage - 3.0 * base.first_stage).abs() < 1e-9);
        assert!((tripled.second_stage_expected - 3.0 * base.second_stage_expected).abs() < 1e-9);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let inst = tiny_instance();
        let space = ScenarioSpace::degenerate(&inst);
        let mut plan = PlanSolution::empty(&inst, 1);
        plan.pairs_reserved.pop();
        assert!(evaluate_cost(&plan, &inst, &space).is_err());
    }

    #[test]
    fn with_requests_trims_cost_table() {
        let inst = tiny_instance();
        let trimmed = inst.with_requests(0).unwrap();
        assert!(trimmed.requests.is_empty());
        assert!(trimmed.pair_slots().is_empty());
        assert!(inst.with_requests(2).is_err());
    }
}
