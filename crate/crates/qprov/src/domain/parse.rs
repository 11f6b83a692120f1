//! Line-oriented text formats for instances and scenario value sets.
//!
//! Topology file:
//! ```text
//! node <id> ecc=<float> scs=<float>
//! link <i> <j> f=<float> fts=<float> rcap=<int> ocap=<int>   # both directions
//! dlink <i> <j> f=<float> fts=<float> rcap=<int> ocap=<int>  # one direction
//! ```
//! Costs file:
//! ```text
//! paircost <node|*> <request|*> r=<float> u=<float> o=<float>
//! qubitcost <circuit|*> <provider|*> r=<float> u=<float> o=<float> pwt=<float>
//! ```
//! Requests file:
//! ```text
//! request <id> src=<node> dst=<node> circuits=<c1,c2,...>
//! provider <id> machines=<m1:cap,m2:cap,...>
//! exe <circuit|*> <provider|*> <machine|*> <request|*> t=<float>
//! ```
//! Scenario file (consumed by the CLI):
//! ```text
//! values <request|*> <circuit|*> fidelity=<v,...> qubits=<v,...> wait=<v,...> \
//!        [fweights=<w,...>] [qweights=<w,...>] [wweights=<w,...>]
//! ```
//! `#` starts a comment, blank lines are skipped, later lines override
//! earlier ones where they overlap. All floats are decimal.

use std::collections::BTreeMap;
use std::fmt;

use super::scenario::{DemandSets, IntValueSet, ValueSet};
use super::{
    CostModel, DomainError, Instance, Machine, NetworkTopology, PhaseCost, Provider, QuantumLink,
    QuantumLinkParams, QubitCost, Request,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParsedFile {
    Topology,
    Costs,
    Requests,
    Scenarios,
}

impl fmt::Display for ParsedFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParsedFile::Topology => write!(f, "topology"),
            ParsedFile::Costs => write!(f, "costs"),
            ParsedFile::Requests => write!(f, "requests"),
            ParsedFile::Scenarios => write!(f, "scenarios"),
        }
    }
}

fn err(file: ParsedFile, line: usize, message: impl Into<String>) -> DomainError {
    DomainError::Parse {
        file,
        line,
        message: message.into(),
    }
}

/// Iterates (1-based line number, content) over non-comment lines.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let trimmed = content.trim();
        if trimmed.is_empty() {
            None
        } else {
            Some((i + 1, trimmed))
        }
    })
}

fn kv<'a>(
    token: &'a str,
    key: &str,
    file: ParsedFile,
    line: usize,
) -> Result<&'a str, DomainError> {
    token
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| err(file, line, format!("expected {key}=<value>, got '{token}'")))
}

fn parse_float(s: &str, what: &str, file: ParsedFile, line: usize) -> Result<f64, DomainError> {
    s.parse::<f64>()
        .map_err(|_| err(file, line, format!("bad {what} value '{s}'")))
}

fn parse_int(s: &str, what: &str, file: ParsedFile, line: usize) -> Result<u32, DomainError> {
    s.parse::<u32>()
        .map_err(|_| err(file, line, format!("bad {what} value '{s}'")))
}

pub(super) fn parse_topology(text: &str) -> Result<NetworkTopology, DomainError> {
    const F: ParsedFile = ParsedFile::Topology;
    let mut builder = NetworkTopology::builder();
    let mut known: BTreeMap<String, usize> = BTreeMap::new();
    for (line, content) in lines(text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens[0] {
            "node" => {
                if tokens.len() != 4 {
                    return Err(err(F, line, "expected: node <id> ecc=<f> scs=<f>"));
                }
                let id = tokens[1];
                if known.contains_key(id) {
                    return Err(err(F, line, format!("duplicate node id {id}")));
                }
                let ecc = parse_float(kv(tokens[2], "ecc", F, line)?, "ecc", F, line)?;
                let scs = parse_float(kv(tokens[3], "scs", F, line)?, "scs", F, line)?;
                if ecc < 0.0 || scs < 0.0 {
                    return Err(err(F, line, format!("node {id} has a negative cost")));
                }
                known.insert(id.to_string(), line);
                builder = builder.node(id, ecc, scs);
            }
            "link" | "dlink" => {
                if tokens.len() != 7 {
                    return Err(err(
                        F,
                        line,
                        format!(
                            "expected: {} <i> <j> f=<f> fts=<f> rcap=<int> ocap=<int>",
                            tokens[0]
                        ),
                    ));
                }
                let (a, b) = (tokens[1], tokens[2]);
                for n in [a, b] {
                    if !known.contains_key(n) {
                        return Err(err(F, line, format!("unknown node {n}")));
                    }
                }
                if a == b {
                    return Err(err(F, line, format!("self-loop on node {a}")));
                }
                let f = parse_float(kv(tokens[3], "f", F, line)?, "f", F, line)?;
                let fts = parse_float(kv(tokens[4], "fts", F, line)?, "fts", F, line)?;
                let rcap = parse_int(kv(tokens[5], "rcap", F, line)?, "rcap", F, line)?;
                let ocap = parse_int(kv(tokens[6], "ocap", F, line)?, "ocap", F, line)?;
                if !(f > 0.0 && f <= 1.0) {
                    return Err(err(F, line, format!("fidelity {f} outside (0, 1]")));
                }
                if !(fts > 0.0 && fts <= 1.0) {
                    return Err(err(
                        F,
                        line,
                        format!("fidelity threshold {fts} outside (0, 1]"),
                    ));
                }
                let params = QuantumLinkParams {
                    base_fidelity: f,
                    fidelity_threshold: fts,
                    reserve_capacity: rcap,
                    ondemand_capacity: ocap,
                };
                builder = if tokens[0] == "link" {
                    builder.link(a, b, params)
                } else {
                    builder.directed_link(a, b, params)
                };
            }
            other => {
                return Err(err(F, line, format!("unknown directive '{other}'")));
            }
        }
    }
    builder.build()
}

struct RawExe {
    circuit: String,
    provider: String,
    machine: String,
    request: String,
    time: f64,
    line: usize,
}

pub(super) fn parse_instance(
    topology_text: &str,
    costs_text: &str,
    requests_text: &str,
) -> Result<Instance, DomainError> {
    let topology = parse_topology(topology_text)?;

    // Requests file: requests, providers, circuit table, raw exe entries.
    const RF: ParsedFile = ParsedFile::Requests;
    let mut requests: Vec<Request> = Vec::new();
    let mut request_ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut providers: Vec<Provider> = Vec::new();
    let mut provider_ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut circuits: Vec<String> = Vec::new();
    let mut circuit_ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut raw_exe: Vec<RawExe> = Vec::new();

    for (line, content) in lines(requests_text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens[0] {
            "request" => {
                if tokens.len() != 5 {
                    return Err(err(
                        RF,
                        line,
                        "expected: request <id> src=<node> dst=<node> circuits=<c1,...>",
                    ));
                }
                let id = tokens[1].to_string();
                if request_ids.contains_key(&id) {
                    return Err(err(RF, line, format!("duplicate request id {id}")));
                }
                let src = kv(tokens[2], "src", RF, line)?;
                let dst = kv(tokens[3], "dst", RF, line)?;
                let source = topology
                    .node_index(src)
                    .ok_or_else(|| err(RF, line, format!("unknown node {src}")))?;
                let destination = topology
                    .node_index(dst)
                    .ok_or_else(|| err(RF, line, format!("unknown node {dst}")))?;
                if source == destination {
                    return Err(err(RF, line, format!("request {id}: src equals dst")));
                }
                let list = kv(tokens[4], "circuits", RF, line)?;
                let mut circ_indices = Vec::new();
                for c in list.split(',').filter(|s| !s.is_empty()) {
                    let idx = *circuit_ids.entry(c.to_string()).or_insert_with(|| {
                        circuits.push(c.to_string());
                        circuits.len() - 1
                    });
                    if circ_indices.contains(&idx) {
                        return Err(err(
                            RF,
                            line,
                            format!("duplicate circuit {c} in request {id}"),
                        ));
                    }
                    circ_indices.push(idx);
                }
                request_ids.insert(id.clone(), requests.len());
                requests.push(Request {
                    id,
                    source,
                    destination,
                    circuits: circ_indices,
                });
            }
            "provider" => {
                if tokens.len() != 3 {
                    return Err(err(
                        RF,
                        line,
                        "expected: provider <id> machines=<m:cap,...>",
                    ));
                }
                let id = tokens[1].to_string();
                if provider_ids.contains_key(&id) {
                    return Err(err(RF, line, format!("duplicate provider id {id}")));
                }
                let spec = kv(tokens[2], "machines", RF, line)?;
                let mut machines = Vec::new();
                for part in spec.split(',').filter(|s| !s.is_empty()) {
                    let (mid, cap) = part.split_once(':').ok_or_else(|| {
                        err(RF, line, format!("expected <machine>:<cap>, got '{part}'"))
                    })?;
                    let cap = parse_int(cap, "machine capacity", RF, line)?;
                    if cap < 1 {
                        return Err(err(RF, line, format!("machine {mid} has zero capacity")));
                    }
                    if machines.iter().any(|m: &Machine| m.id == mid) {
                        return Err(err(RF, line, format!("duplicate machine id {mid}")));
                    }
                    machines.push(Machine {
                        id: mid.to_string(),
                        qubit_capacity: cap,
                        execution_time: BTreeMap::new(),
                    });
                }
                if machines.is_empty() {
                    return Err(err(RF, line, format!("provider {id} has no machines")));
                }
                provider_ids.insert(id.clone(), providers.len());
                providers.push(Provider { id, machines });
            }
            "exe" => {
                if tokens.len() != 6 {
                    return Err(err(
                        RF,
                        line,
                        "expected: exe <circuit> <provider> <machine> <request> t=<f>",
                    ));
                }
                let time = parse_float(kv(tokens[5], "t", RF, line)?, "t", RF, line)?;
                if time < 0.0 {
                    return Err(err(RF, line, "negative execution time"));
                }
                raw_exe.push(RawExe {
                    circuit: tokens[1].to_string(),
                    provider: tokens[2].to_string(),
                    machine: tokens[3].to_string(),
                    request: tokens[4].to_string(),
                    time,
                    line,
                });
            }
            other => return Err(err(RF, line, format!("unknown directive '{other}'"))),
        }
    }

    // Apply exe entries to every hosting combination they match.
    for entry in &raw_exe {
        let matches_id = |pattern: &str, id: &str| pattern == "*" || pattern == id;
        for check in [
            (
                &entry.circuit,
                circuit_ids.contains_key(&entry.circuit),
                "circuit",
            ),
            (
                &entry.provider,
                provider_ids.contains_key(&entry.provider),
                "provider",
            ),
            (
                &entry.request,
                request_ids.contains_key(&entry.request),
                "request",
            ),
        ] {
            if check.0 != "*" && !check.1 {
                return Err(err(
                    RF,
                    entry.line,
                    format!("unknown {} {}", check.2, check.0),
                ));
            }
        }
        let mut touched = false;
        for r in &requests {
            if !matches_id(&entry.request, &r.id) {
                continue;
            }
            for &c in &r.circuits {
                if !matches_id(&entry.circuit, &circuits[c]) {
                    continue;
                }
                for p in providers.iter_mut() {
                    if !matches_id(&entry.provider, &p.id) {
                        continue;
                    }
                    for m in p.machines.iter_mut() {
                        if !matches_id(&entry.machine, &m.id) {
                            continue;
                        }
                        m.execution_time
                            .insert((r.id.clone(), circuits[c].clone()), entry.time);
                        touched = true;
                    }
                }
            }
        }
        if !touched && entry.machine != "*" {
            let known = providers
                .iter()
                .any(|p| p.machines.iter().any(|m| m.id == entry.machine));
            if !known {
                return Err(err(
                    RF,
                    entry.line,
                    format!("unknown machine {}", entry.machine),
                ));
            }
        }
    }

    // Costs file against the now-known tables.
    const CF: ParsedFile = ParsedFile::Costs;
    let mut pair: Vec<Vec<Option<PhaseCost>>> =
        vec![vec![None; requests.len()]; topology.nodes().len()];
    let mut qubit: Vec<Vec<Option<QubitCost>>> = vec![vec![None; providers.len()]; circuits.len()];
    for (line, content) in lines(costs_text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens[0] {
            "paircost" => {
                if tokens.len() != 6 {
                    return Err(err(
                        CF,
                        line,
                        "expected: paircost <node> <request> r=<f> u=<f> o=<f>",
                    ));
                }
                let cost = PhaseCost {
                    reserve: parse_float(kv(tokens[3], "r", CF, line)?, "r", CF, line)?,
                    utilize: parse_float(kv(tokens[4], "u", CF, line)?, "u", CF, line)?,
                    ondemand: parse_float(kv(tokens[5], "o", CF, line)?, "o", CF, line)?,
                };
                if cost.reserve < 0.0 || cost.utilize < 0.0 || cost.ondemand < 0.0 {
                    return Err(err(CF, line, "negative pair cost"));
                }
                let nodes: Vec<usize> = if tokens[1] == "*" {
                    (0..topology.nodes().len()).collect()
                } else {
                    vec![topology
                        .node_index(tokens[1])
                        .ok_or_else(|| err(CF, line, format!("unknown node {}", tokens[1])))?]
                };
                let reqs: Vec<usize> = if tokens[2] == "*" {
                    (0..requests.len()).collect()
                } else {
                    vec![*request_ids
                        .get(tokens[2])
                        .ok_or_else(|| err(CF, line, format!("unknown request {}", tokens[2])))?]
                };
                for &n in &nodes {
                    for &r in &reqs {
                        pair[n][r] = Some(cost);
                    }
                }
            }
            "qubitcost" => {
                if tokens.len() != 7 {
                    return Err(err(
                        CF,
                        line,
                        "expected: qubitcost <circuit> <provider> r=<f> u=<f> o=<f> pwt=<f>",
                    ));
                }
                let cost = QubitCost {
                    reserve: parse_float(kv(tokens[3], "r", CF, line)?, "r", CF, line)?,
                    utilize: parse_float(kv(tokens[4], "u", CF, line)?, "u", CF, line)?,
                    ondemand: parse_float(kv(tokens[5], "o", CF, line)?, "o", CF, line)?,
                    overwait_penalty: parse_float(
                        kv(tokens[6], "pwt", CF, line)?,
                        "pwt",
                        CF,
                        line,
                    )?,
                };
                if cost.reserve < 0.0
                    || cost.utilize < 0.0
                    || cost.ondemand < 0.0
                    || cost.overwait_penalty < 0.0
                {
                    return Err(err(CF, line, "negative qubit cost"));
                }
                let circs: Vec<usize> = if tokens[1] == "*" {
                    (0..circuits.len()).collect()
                } else {
                    vec![*circuit_ids
                        .get(tokens[1])
                        .ok_or_else(|| err(CF, line, format!("unknown circuit {}", tokens[1])))?]
                };
                let provs: Vec<usize> = if tokens[2] == "*" {
                    (0..providers.len()).collect()
                } else {
                    vec![*provider_ids
                        .get(tokens[2])
                        .ok_or_else(|| err(CF, line, format!("unknown provider {}", tokens[2])))?]
                };
                for &c in &circs {
                    for &p in &provs {
                        qubit[c][p] = Some(cost);
                    }
                }
            }
            other => return Err(err(CF, line, format!("unknown directive '{other}'"))),
        }
    }

    let mut pair_resolved = Vec::with_capacity(pair.len());
    for (n, row) in pair.into_iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (r, c) in row.into_iter().enumerate() {
            out.push(c.ok_or_else(|| {
                DomainError::Invalid(format!(
                    "missing paircost for node {} request {}",
                    topology.nodes()[n].id,
                    requests[r].id
                ))
            })?);
        }
        pair_resolved.push(out);
    }
    let mut qubit_resolved = Vec::with_capacity(qubit.len());
    for (c, row) in qubit.into_iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (p, cost) in row.into_iter().enumerate() {
            out.push(cost.ok_or_else(|| {
                DomainError::Invalid(format!(
                    "missing qubitcost for circuit {} provider {}",
                    circuits[c], providers[p].id
                ))
            })?);
        }
        qubit_resolved.push(out);
    }

    Instance::assemble(
        topology,
        providers,
        requests,
        circuits,
        CostModel {
            pair: pair_resolved,
            qubit: qubit_resolved,
        },
    )
}

/// Parses per-(request, circuit) demand value sets for an instance.
pub fn parse_scenario_sets(
    text: &str,
    instance: &Instance,
) -> Result<Vec<Vec<DemandSets>>, DomainError> {
    const F: ParsedFile = ParsedFile::Scenarios;
    let mut sets: Vec<Vec<Option<DemandSets>>> = instance
        .requests
        .iter()
        .map(|r| vec![None; r.circuits.len()])
        .collect();

    let parse_f64_list = |s: &str, what: &str, line: usize| -> Result<Vec<f64>, DomainError> {
        s.split(',')
            .filter(|t| !t.is_empty())
            .map(|t| parse_float(t, what, F, line))
            .collect()
    };
    let parse_u32_list = |s: &str, what: &str, line: usize| -> Result<Vec<u32>, DomainError> {
        s.split(',')
            .filter(|t| !t.is_empty())
            .map(|t| parse_int(t, what, F, line))
            .collect()
    };

    for (line, content) in lines(text) {
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens[0] != "values" {
            return Err(err(F, line, format!("unknown directive '{}'", tokens[0])));
        }
        if tokens.len() < 6 {
            return Err(err(
                F,
                line,
                "expected: values <request> <circuit> fidelity=<...> qubits=<...> wait=<...>",
            ));
        }
        let mut fidelity: Option<Vec<f64>> = None;
        let mut qubits: Option<Vec<u32>> = None;
        let mut wait: Option<Vec<f64>> = None;
        let mut fweights: Option<Vec<f64>> = None;
        let mut qweights: Option<Vec<f64>> = None;
        let mut wweights: Option<Vec<f64>> = None;
        for token in &tokens[3..] {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| err(F, line, format!("expected key=value, got '{token}'")))?;
            match key {
                "fidelity" => fidelity = Some(parse_f64_list(value, "fidelity", line)?),
                "qubits" => qubits = Some(parse_u32_list(value, "qubits", line)?),
                "wait" => wait = Some(parse_f64_list(value, "wait", line)?),
                "fweights" => fweights = Some(parse_f64_list(value, "fweights", line)?),
                "qweights" => qweights = Some(parse_f64_list(value, "qweights", line)?),
                "wweights" => wweights = Some(parse_f64_list(value, "wweights", line)?),
                other => return Err(err(F, line, format!("unknown key '{other}'"))),
            }
        }
        // The first specified key=value pair sits at token 3; re-read the
        // leading fidelity= in case the order matched the documented layout.
        if fidelity.is_none() {
            return Err(err(F, line, "missing fidelity=<...>"));
        }
        let (Some(fidelity), Some(qubits), Some(wait)) = (fidelity, qubits, wait) else {
            return Err(err(F, line, "missing qubits=<...> or wait=<...>"));
        };
        let build = DemandSets {
            fidelity: match fweights {
                Some(w) => ValueSet {
                    values: fidelity,
                    weights: w,
                },
                None => ValueSet::uniform(fidelity),
            },
            qubits: match qweights {
                Some(w) => IntValueSet {
                    values: qubits,
                    weights: w,
                },
                None => IntValueSet::uniform(qubits),
            },
            wait: match wweights {
                Some(w) => ValueSet {
                    values: wait,
                    weights: w,
                },
                None => ValueSet::uniform(wait),
            },
        };

        let req_pattern = tokens[1];
        let circ_pattern = tokens[2];
        let mut touched = false;
        for (ri, r) in instance.requests.iter().enumerate() {
            if req_pattern != "*" && req_pattern != r.id {
                continue;
            }
            for (cl, &c) in r.circuits.iter().enumerate() {
                if circ_pattern != "*" && circ_pattern != instance.circuits[c] {
                    continue;
                }
                sets[ri][cl] = Some(build.clone());
                touched = true;
            }
        }
        if !touched {
            return Err(err(
                F,
                line,
                format!("no (request, circuit) matches ({req_pattern}, {circ_pattern})"),
            ));
        }
    }

    let mut out = Vec::with_capacity(sets.len());
    for (ri, row) in sets.into_iter().enumerate() {
        let mut resolved = Vec::with_capacity(row.len());
        for (cl, d) in row.into_iter().enumerate() {
            resolved.push(d.ok_or_else(|| {
                DomainError::Invalid(format!(
                    "no demand values for circuit {} of request {}",
                    instance.circuits[instance.requests[ri].circuits[cl]], instance.requests[ri].id
                ))
            })?);
        }
        out.push(resolved);
    }
    Ok(out)
}

fn push_link_line(out: &mut String, verb: &str, a: &str, b: &str, l: &QuantumLink) {
    out.push_str(&format!(
        "{verb} {a} {b} f={} fts={} rcap={} ocap={}\n",
        l.base_fidelity, l.fidelity_threshold, l.reserve_capacity, l.ondemand_capacity
    ));
}

pub(super) fn serialize_instance(instance: &Instance) -> (String, String, String) {
    let topo = &instance.topology;
    let mut topology_text = String::new();
    for n in topo.nodes() {
        topology_text.push_str(&format!(
            "node {} ecc={} scs={}\n",
            n.id, n.energy_cost, n.repeater_setup_cost
        ));
    }
    // Adjacent mutual pairs with equal parameters collapse back into `link`.
    let links = topo.links();
    let mut skip = vec![false; links.len()];
    for i in 0..links.len() {
        if skip[i] {
            continue;
        }
        let a = &topo.nodes()[links[i].from].id;
        let b = &topo.nodes()[links[i].to].id;
        let mate = (i + 1 < links.len()
            && links[i + 1].from == links[i].to
            && links[i + 1].to == links[i].from
            && links[i + 1].base_fidelity == links[i].base_fidelity
            && links[i + 1].fidelity_threshold == links[i].fidelity_threshold
            && links[i + 1].reserve_capacity == links[i].reserve_capacity
            && links[i + 1].ondemand_capacity == links[i].ondemand_capacity)
            .then_some(i + 1);
        match mate {
            Some(j) => {
                skip[j] = true;
                push_link_line(&mut topology_text, "link", a, b, &links[i]);
            }
            None => push_link_line(&mut topology_text, "dlink", a, b, &links[i]),
        }
    }

    let mut costs_text = String::new();
    for (n, row) in instance.costs.pair.iter().enumerate() {
        for (r, c) in row.iter().enumerate() {
            costs_text.push_str(&format!(
                "paircost {} {} r={} u={} o={}\n",
                topo.nodes()[n].id,
                instance.requests[r].id,
                c.reserve,
                c.utilize,
                c.ondemand
            ));
        }
    }
    for (c, row) in instance.costs.qubit.iter().enumerate() {
        for (p, cost) in row.iter().enumerate() {
            costs_text.push_str(&format!(
                "qubitcost {} {} r={} u={} o={} pwt={}\n",
                instance.circuits[c],
                instance.providers[p].id,
                cost.reserve,
                cost.utilize,
                cost.ondemand,
                cost.overwait_penalty
            ));
        }
    }

    let mut requests_text = String::new();
    for r in &instance.requests {
        let circuits: Vec<&str> = r
            .circuits
            .iter()
            .map(|&c| instance.circuits[c].as_str())
            .collect();
        requests_text.push_str(&format!(
            "request {} src={} dst={} circuits={}\n",
            r.id,
            topo.nodes()[r.source].id,
            topo.nodes()[r.destination].id,
            circuits.join(",")
        ));
    }
    for p in &instance.providers {
        let machines: Vec<String> = p
            .machines
            .iter()
            .map(|m| format!("{}:{}", m.id, m.qubit_capacity))
            .collect();
        requests_text.push_str(&format!(
            "provider {} machines={}\n",
            p.id,
            machines.join(",")
        ));
    }
    for slot in instance.qubit_slots() {
        requests_text.push_str(&format!(
            "exe {} {} {} {} t={}\n",
            instance.circuits[slot.circuit],
            instance.providers[slot.provider].id,
            instance.providers[slot.provider].machines[slot.machine].id,
            instance.requests[slot.request].id,
            slot.execution_time
        ));
    }

    (topology_text, costs_text, requests_text)
}
