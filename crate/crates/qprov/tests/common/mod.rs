//! Shared fixtures: small hand-checkable instances and random generators
//! with brute-force oracles kept independent of the planner's solve path.

#![allow(dead_code)]

pub mod oracle;

use std::collections::BTreeMap;

use qprov::domain::{
    build_scenario_space, CostModel, DemandSets, Instance, Machine, NetworkTopology, PhaseCost,
    Provider, QuantumLinkParams, QubitCost, Request, ScenarioSpace,
};

pub fn link_params(f: f64, fts: f64, rcap: u32, ocap: u32) -> QuantumLinkParams {
    QuantumLinkParams {
        base_fidelity: f,
        fidelity_threshold: fts,
        reserve_capacity: rcap,
        ondemand_capacity: ocap,
    }
}

pub fn machine_with_exe(id: &str, cap: u32, entries: &[(&str, &str, f64)]) -> Machine {
    Machine {
        id: id.into(),
        qubit_capacity: cap,
        execution_time: entries
            .iter()
            .map(|(r, c, t)| ((r.to_string(), c.to_string()), *t))
            .collect::<BTreeMap<_, _>>(),
    }
}

/// Directed path 1 -> 2 -> 3 with the published 0.55 fidelity on the second
/// hop, one request, one circuit on a single machine.
pub fn three_node_path() -> Instance {
    let topology = NetworkTopology::builder()
        .node("1", 5.0, 151.0)
        .node("2", 5.0, 151.0)
        .node("3", 5.0, 151.0)
        .directed_link("1", "2", link_params(0.9, 0.8, 9, 60))
        .directed_link("2", "3", link_params(0.55, 0.8, 9, 60))
        .build()
        .unwrap();
    let providers = vec![Provider {
        id: "p1".into(),
        machines: vec![machine_with_exe("m1", 30, &[("r1", "c1", 0.004)])],
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

/// Two equally likely scenarios demanding fidelity 0.8 or 0.9 with ten
/// qubits and a 0.004 s wait.
pub fn two_fidelity_scenarios(instance: &Instance) -> ScenarioSpace {
    let sets = instance
        .requests
        .iter()
        .map(|r| {
            r.circuits
                .iter()
                .map(|_| DemandSets::uniform(vec![0.8, 0.9], vec![10], vec![0.004]))
                .collect()
        })
        .collect();
    build_scenario_space(sets).unwrap()
}

/// Same topology, demands kept below the reservation cap everywhere
/// (fidelity 0.7 or 0.8 needs at most 7 pairs on the 0.55 link).
pub fn cap_respecting_scenarios(instance: &Instance) -> ScenarioSpace {
    let sets = instance
        .requests
        .iter()
        .map(|r| {
            r.circuits
                .iter()
                .map(|_| DemandSets::uniform(vec![0.7, 0.8], vec![10], vec![0.004]))
                .collect()
        })
        .collect();
    build_scenario_space(sets).unwrap()
}
