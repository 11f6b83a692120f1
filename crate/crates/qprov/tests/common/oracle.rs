//! Brute-force oracles and random generators.
//!
//! The oracles enumerate raw decision lattices instead of calling into the
//! planner's solve path. Generated costs and times are dyadic rationals
//! (multiples of 1/4 and 1/64) and scenario probabilities are halves, so
//! every objective term is exact in f64 and totals are order-independent;
//! "equals exactly" is then meaningful.

use std::collections::BTreeMap;

use qprov::domain::{
    build_scenario_space, CostModel, DemandSets, Instance, Machine, NetworkTopology, PhaseCost,
    Provider, QuantumLinkParams, QubitCost, Request, ScenarioSpace,
};
use qprov::purify::purify_chain;
use qprov::solver::{LinearProgram, Sense, VarKind};
use rand::Rng;

/// Smallest chain length meeting `target` on a link, scanned directly.
fn pairs_needed(base: f64, target: f64, budget: u32) -> Option<u32> {
    for k in 1..=budget {
        if purify_chain(base, k).unwrap() + 1e-9 >= target {
            return Some(k);
        }
    }
    None
}

/// All simple directed paths from `src` to `dst`, as link index sequences.
fn all_paths(topo: &NetworkTopology, src: usize, dst: usize) -> Vec<Vec<usize>> {
    fn dfs(
        topo: &NetworkTopology,
        node: usize,
        dst: usize,
        seen: &mut Vec<bool>,
        path: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if node == dst {
            out.push(path.clone());
            return;
        }
        seen[node] = true;
        for &l in topo.outgoing(node) {
            let to = topo.link(l).to;
            if !seen[to] {
                path.push(l);
                dfs(topo, to, dst, seen, path, out);
                path.pop();
            }
        }
        seen[node] = false;
    }
    let mut out = Vec::new();
    dfs(
        topo,
        src,
        dst,
        &mut vec![false; topo.nodes().len()],
        &mut Vec::new(),
        &mut out,
    );
    out
}

/// Cheapest phase split for one link shared by `users`, enumerated over the
/// full reservation and utilization lattices. On-demand counts take their
/// minimal feasible value: their price is non-negative, so larger values
/// never win, and smaller ones never exist.
fn best_link_cost(
    instance: &Instance,
    space: &ScenarioSpace,
    link_idx: usize,
    users: &[usize],
    thresholds: &BTreeMap<(usize, usize), u32>,
) -> Option<f64> {
    let link = instance.topology.link(link_idx);
    let rcap = link.reserve_capacity;
    let ocap = link.ondemand_capacity;
    let ns = space.scenarios.len();

    // Enumerate per-user reservations with the shared cap.
    let mut res_choices: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in users {
        let mut next = Vec::new();
        for base in &res_choices {
            let used: u32 = base.iter().sum();
            for y in 0..=rcap.saturating_sub(used) {
                let mut v = base.clone();
                v.push(y);
                next.push(v);
            }
        }
        res_choices = next;
    }

    let mut best: Option<f64> = None;
    for reservation in &res_choices {
        let mut total = 0.0;
        for (u, &r) in users.iter().enumerate() {
            let slot = &instance.pair_slots()[instance.pair_slot_index(link_idx, r)];
            total += instance.pair_first_stage_price(slot) * reservation[u] as f64;
            let _ = u;
        }
        let mut feasible = true;
        for k in 0..ns {
            let prob = space.scenarios[k].probability;
            // Joint utilization lattice for this scenario.
            let mut util_choices: Vec<Vec<u32>> = vec![Vec::new()];
            for (u, _) in users.iter().enumerate() {
                let mut next = Vec::new();
                for base in &util_choices {
                    for y in 0..=reservation[u] {
                        let mut v = base.clone();
                        v.push(y);
                        next.push(v);
                    }
                }
                util_choices = next;
            }
            let mut best_scenario: Option<f64> = None;
            for util in &util_choices {
                let mut ondemand_sum = 0;
                let mut cost = 0.0;
                let mut ok = true;
                for (u, &r) in users.iter().enumerate() {
                    let need = thresholds[&(r, k)];
                    let od = need.saturating_sub(util[u]);
                    if od > ocap {
                        ok = false;
                        break;
                    }
                    ondemand_sum += od;
                    let slot = &instance.pair_slots()[instance.pair_slot_index(link_idx, r)];
                    let price = instance.pair_slot_cost(slot);
                    cost += price.utilize * util[u] as f64 + price.ondemand * od as f64;
                }
                if !ok || ondemand_sum > ocap {
                    continue;
                }
                best_scenario = Some(match best_scenario {
                    Some(b) if b <= cost => b,
                    _ => cost,
                });
            }
            match best_scenario {
                Some(c) => total += prob * c,
                None => {
                    feasible = false;
                    break;
                }
            }
        }
        if feasible {
            best = Some(match best {
                Some(b) if b <= total => b,
                _ => total,
            });
        }
    }
    best
}

/// Cheapest machine choice and qubit phase split for one circuit,
/// enumerated over machines and the reservation/utilization lattices.
fn best_circuit_cost(
    instance: &Instance,
    space: &ScenarioSpace,
    request: usize,
    circuit_local: usize,
) -> f64 {
    let ns = space.scenarios.len();
    let mut best = f64::INFINITY;
    for slot in instance.qubit_slots() {
        if slot.request != request || slot.circuit_local != circuit_local {
            continue;
        }
        let price = instance.qubit_slot_cost(slot);
        let cap = instance.machine(slot).qubit_capacity;
        for reserved in 0..=cap {
            let mut total = price.reserve * reserved as f64;
            for k in 0..ns {
                let prob = space.scenarios[k].probability;
                let demand = space.scenarios[k].qubits[slot.request][slot.circuit_local];
                let wait = space.scenarios[k].wait[slot.request][slot.circuit_local];
                let overrun = (slot.execution_time - wait).max(0.0);
                let mut best_split = f64::INFINITY;
                for used in 0..=reserved.min(cap) {
                    let od = demand.saturating_sub(used);
                    let c = price.utilize * used as f64 + price.ondemand * od as f64;
                    if c < best_split {
                        best_split = c;
                    }
                }
                total += prob * (best_split + price.overwait_penalty * overrun);
            }
            if total < best {
                best = total;
            }
        }
    }
    best
}

/// Exhaustive optimum of the full provisioning problem: every route tuple,
/// every integer phase allocation. `None` when no route tuple is feasible.
pub fn brute_force_total(instance: &Instance, space: &ScenarioSpace) -> Option<f64> {
    let topo = &instance.topology;
    let nr = instance.requests.len();

    // Pair side.
    let mut pair_best: Option<f64> = None;
    if nr == 0 {
        pair_best = Some(0.0);
    } else {
        let per_request_paths: Vec<Vec<Vec<usize>>> = instance
            .requests
            .iter()
            .map(|r| all_paths(topo, r.source, r.destination))
            .collect();
        if per_request_paths.iter().any(|p| p.is_empty()) {
            return None;
        }
        let mut choice = vec![0usize; nr];
        loop {
            // Users per link under this route tuple.
            let mut users: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for (r, &c) in choice.iter().enumerate() {
                for &l in &per_request_paths[r][c] {
                    users.entry(l).or_default().push(r);
                }
            }
            // Thresholds per (link, request, scenario); infeasible links sink
            // the whole tuple.
            let mut tuple_cost = Some(0.0);
            'links: for (&l, rs) in &users {
                let link = topo.link(l);
                let budget = link.reserve_capacity + link.ondemand_capacity;
                let mut thresholds = BTreeMap::new();
                for &r in rs {
                    for k in 0..space.scenarios.len() {
                        let demand = space.max_fidelity_demand(k, r);
                        let target = demand.max(link.fidelity_threshold);
                        match pairs_needed(link.base_fidelity, target, budget.max(1)) {
                            Some(n) if n <= budget => {
                                thresholds.insert((r, k), n);
                            }
                            _ => {
                                tuple_cost = None;
                                break 'links;
                            }
                        }
                    }
                }
                match best_link_cost(instance, space, l, rs, &thresholds) {
                    Some(c) => {
                        if let Some(t) = tuple_cost.as_mut() {
                            *t += c;
                        }
                    }
                    None => {
                        tuple_cost = None;
                        break 'links;
                    }
                }
            }
            if let Some(c) = tuple_cost {
                pair_best = Some(match pair_best {
                    Some(b) if b <= c => b,
                    _ => c,
                });
            }
            // Advance the route tuple odometer.
            let mut pos = nr;
            loop {
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
                pos -= 1;
                choice[pos] += 1;
                if choice[pos] < per_request_paths[pos].len() {
                    break;
                }
                choice[pos] = 0;
                if pos == 0 {
                    pos = usize::MAX;
                    break;
                }
            }
            if pos == usize::MAX {
                break;
            }
        }
    }

    let pair_total = pair_best?;

    // Qubit side, independent of routing.
    let mut qubit_total = 0.0;
    for (r, req) in instance.requests.iter().enumerate() {
        for (cl, _) in req.circuits.iter().enumerate() {
            let c = best_circuit_cost(instance, space, r, cl);
            if !c.is_finite() {
                return None;
            }
            qubit_total += c;
        }
    }

    Some(pair_total + qubit_total)
}

fn dyadic(rng: &mut impl Rng, lo_quarters: u32, hi_quarters: u32) -> f64 {
    rng.gen_range(lo_quarters..=hi_quarters) as f64 * 0.25
}

fn sixty_fourth(rng: &mut impl Rng, lo: u32, hi: u32) -> f64 {
    rng.gen_range(lo..=hi) as f64 / 64.0
}

/// Random planning instance small enough for the brute-force oracle:
/// at most 4 nodes, 1-2 requests, 2 scenarios, pair caps at most 9.
pub fn random_tiny_instance(rng: &mut impl Rng) -> (Instance, ScenarioSpace) {
    let n_nodes = rng.gen_range(3..=4);
    let mut builder = NetworkTopology::builder();
    for i in 0..n_nodes {
        builder = builder.node(format!("n{i}"), dyadic(rng, 0, 20), dyadic(rng, 0, 80));
    }
    // A guaranteed forward path plus random extra edges.
    let fidelities = [0.7, 0.75, 0.8, 0.85, 0.9];
    let mut edges: Vec<(usize, usize)> = (0..n_nodes - 1).map(|i| (i, i + 1)).collect();
    for _ in 0..rng.gen_range(1..=3) {
        let a = rng.gen_range(0..n_nodes);
        let b = rng.gen_range(0..n_nodes);
        if a != b && !edges.contains(&(a, b)) {
            edges.push((a, b));
        }
    }
    for &(a, b) in &edges {
        let params = QuantumLinkParams {
            base_fidelity: fidelities[rng.gen_range(0..fidelities.len())],
            fidelity_threshold: [0.6, 0.7, 0.8][rng.gen_range(0..3)],
            reserve_capacity: rng.gen_range(2..=5),
            ondemand_capacity: rng.gen_range(4..=9),
        };
        builder = builder.directed_link(format!("n{a}"), format!("n{b}"), params);
    }
    let topology = builder.build().unwrap();

    let nr = rng.gen_range(1..=2);
    let mut requests = Vec::new();
    let mut circuits = Vec::new();
    for r in 0..nr {
        let source = if r == 0 {
            0
        } else {
            rng.gen_range(0..n_nodes - 1)
        };
        let destination = rng.gen_range(source + 1..n_nodes);
        circuits.push(format!("c{r}"));
        requests.push(Request {
            id: format!("r{r}"),
            source,
            destination,
            circuits: vec![r],
        });
    }

    let n_prov = rng.gen_range(1..=2);
    let mut providers = Vec::new();
    for p in 0..n_prov {
        let n_mach = rng.gen_range(1..=2);
        let mut machines = Vec::new();
        for m in 0..n_mach {
            let mut execution_time = BTreeMap::new();
            for (r, req) in requests.iter().enumerate() {
                execution_time.insert(
                    (req.id.clone(), circuits[r].clone()),
                    sixty_fourth(rng, 0, 8),
                );
            }
            machines.push(Machine {
                id: format!("m{m}"),
                qubit_capacity: rng.gen_range(5..=9),
                execution_time,
            });
        }
        providers.push(Provider {
            id: format!("p{p}"),
            machines,
        });
    }

    let pair = (0..n_nodes)
        .map(|_| {
            (0..nr)
                .map(|_| PhaseCost {
                    reserve: dyadic(rng, 0, 40),
                    utilize: dyadic(rng, 0, 8),
                    ondemand: dyadic(rng, 40, 160),
                })
                .collect()
        })
        .collect();
    let qubit = (0..circuits.len())
        .map(|_| {
            (0..n_prov)
                .map(|_| QubitCost {
                    reserve: dyadic(rng, 0, 12),
                    utilize: dyadic(rng, 0, 4),
                    ondemand: dyadic(rng, 12, 40),
                    overwait_penalty: dyadic(rng, 0, 40),
                })
                .collect()
        })
        .collect();

    let instance = Instance::assemble(
        topology,
        providers,
        requests,
        circuits,
        CostModel { pair, qubit },
    )
    .unwrap();

    // Two equally likely scenarios overall: the first request draws two
    // demand levels, everyone else is deterministic.
    let demand_levels = [0.65, 0.75, 0.85];
    let sets = instance
        .requests
        .iter()
        .enumerate()
        .map(|(r, req)| {
            req.circuits
                .iter()
                .map(|_| {
                    let fid = if r == 0 {
                        let mut pick: Vec<f64> = Vec::new();
                        while pick.len() < 2 {
                            let f = demand_levels[rng.gen_range(0..demand_levels.len())];
                            if !pick.contains(&f) {
                                pick.push(f);
                            }
                        }
                        pick
                    } else {
                        vec![demand_levels[rng.gen_range(0..demand_levels.len())]]
                    };
                    DemandSets::uniform(
                        fid,
                        vec![rng.gen_range(0..=5)],
                        vec![sixty_fourth(rng, 0, 8)],
                    )
                })
                .collect()
        })
        .collect();
    let space = build_scenario_space(sets).unwrap();
    (instance, space)
}

/// Random all-integer program: at most 6 variables with bounds within 0..=5
/// and at most 8 constraints with small integer coefficients.
pub fn random_milp(rng: &mut impl Rng) -> LinearProgram {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=8);
    let mut p = LinearProgram::new();
    let mut ids = Vec::new();
    for j in 0..n {
        let lo = rng.gen_range(0..=2) as f64;
        let hi = lo + rng.gen_range(0..=3) as f64;
        let v = p
            .add_var(format!("x{j}"), VarKind::Integer, lo, hi.min(5.0))
            .unwrap();
        p.set_objective_coef(v, rng.gen_range(-5..=5) as f64);
        ids.push(v);
    }
    for i in 0..m {
        let terms: Vec<_> = ids
            .iter()
            .map(|&v| (v, rng.gen_range(-5..=5) as f64))
            .filter(|&(_, c)| c != 0.0)
            .collect();
        if terms.is_empty() {
            continue;
        }
        // Right-hand sides drawn from each row's achievable activity range,
        // so individual rows are satisfiable and joint feasibility stays
        // plausible; equalities are kept rare.
        let (lo, hi) = terms.iter().fold((0.0f64, 0.0f64), |(lo, hi), &(v, c)| {
            let (vl, vh) = p.var_bounds(v);
            if c >= 0.0 {
                (lo + c * vl, hi + c * vh)
            } else {
                (lo + c * vh, hi + c * vl)
            }
        });
        let sense = match rng.gen_range(0..10) {
            0 => Sense::Eq,
            n if n < 6 => Sense::Le,
            _ => Sense::Ge,
        };
        let rhs = rng.gen_range(lo as i64..=hi as i64) as f64;
        p.add_constraint(format!("c{i}"), &terms, sense, rhs)
            .unwrap();
    }
    p
}

/// Exhaustive optimum of an all-integer program over its bound box.
pub fn lattice_optimum(program: &LinearProgram) -> Option<f64> {
    let n = program.num_vars();
    let mut point = Vec::with_capacity(n);
    let mut lows = Vec::with_capacity(n);
    let mut highs = Vec::with_capacity(n);
    for id in program.var_ids() {
        let (lo, hi) = program.var_bounds(id);
        lows.push(lo as i64);
        highs.push(hi as i64);
        point.push(lo as i64);
    }
    let mut best: Option<f64> = None;
    loop {
        let values: Vec<f64> = point.iter().map(|&v| v as f64).collect();
        let mut feasible = true;
        for i in 0..program.num_constraints() {
            let act = program.constraint_activity(i, &values);
            let rhs = program.constraint_rhs(i);
            let ok = match program.constraint_sense(i) {
                Sense::Le => act <= rhs + 1e-9,
                Sense::Ge => act >= rhs - 1e-9,
                Sense::Eq => (act - rhs).abs() <= 1e-9,
            };
            if !ok {
                feasible = false;
                break;
            }
        }
        if feasible {
            let obj = program.objective_value(&values);
            best = Some(match best {
                Some(b) if b <= obj => b,
                _ => obj,
            });
        }
        // Odometer.
        let mut pos = n;
        loop {
            if pos == 0 {
                pos = usize::MAX;
                break;
            }
            pos -= 1;
            point[pos] += 1;
            if point[pos] <= highs[pos] {
                break;
            }
            point[pos] = lows[pos];
            if pos == 0 {
                pos = usize::MAX;
                break;
            }
        }
        if n == 0 || pos == usize::MAX {
            break;
        }
    }
    best
}
