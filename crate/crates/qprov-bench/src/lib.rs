//! Shared fixtures for the planner benchmarks.

use qprov::domain::{build_scenario_space, DemandSets, Instance, ScenarioSpace};

/// Three-node chain with the published 0.55 hop; the smallest instance that
/// still exercises routing, purification thresholds and both resource sides.
pub fn bench_instance() -> (Instance, ScenarioSpace) {
    let topology = "\
node 1 ecc=5 scs=151
node 2 ecc=5 scs=151
node 3 ecc=5 scs=151
link 1 2 f=0.9 fts=0.8 rcap=9 ocap=60
link 2 3 f=0.55 fts=0.8 rcap=9 ocap=60
";
    let costs = "paircost * * r=10 u=1 o=200\nqubitcost * * r=1.68 u=0.1 o=7 pwt=10\n";
    let requests =
        "request r1 src=1 dst=3 circuits=c1\nprovider p1 machines=m1:30\nexe * * * * t=0.004\n";
    let instance = Instance::parse(topology, costs, requests).unwrap();
    let sets = vec![vec![DemandSets::uniform(
        vec![0.8, 0.9],
        vec![10],
        vec![0.004],
    )]];
    let space = build_scenario_space(sets).unwrap();
    (instance, space)
}
