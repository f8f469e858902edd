#![allow(dead_code)]

use shuttle_core::{
    FleetConfig, Instance, Network, Objective, Request, Scenario, StationId, Subnetwork, SubnetworkId,
    SubnetworkKind,
};

pub fn s(i: u32) -> StationId {
    StationId(i)
}

/// Circuit v1..vn, every edge `scale` long, origin and depot v1.
pub fn circuit(n: u32, scale: u64, cap: u32, requests: Vec<Request>, objective: Objective) -> Instance {
    let edges: Vec<_> = (1..=n).map(|i| (i, i % n + 1, scale)).collect();
    let net = Network::from_edges(1..=n, edges, 1).unwrap();
    let c = Subnetwork::new(SubnetworkId(0), SubnetworkKind::Circuit, (1..=n).map(s).collect(), 0, &net).unwrap();
    Instance::new(
        net,
        vec![c],
        FleetConfig::round_robin(1, cap, &[SubnetworkId(0)]),
        requests,
        Scenario::Other,
        objective,
    )
    .unwrap()
}

/// Line over the given stations in order, every edge `scale` long, origin and depot at the first.
pub fn line(stations: &[u32], scale: u64, cap: u32, requests: Vec<Request>, objective: Objective) -> Instance {
    let edges: Vec<_> = stations.windows(2).map(|w| (w[0], w[1], scale)).collect();
    let net = Network::from_edges(stations.iter().copied(), edges, stations[0]).unwrap();
    let l = Subnetwork::new(
        SubnetworkId(0),
        SubnetworkKind::Line,
        stations.iter().copied().map(s).collect(),
        0,
        &net,
    )
    .unwrap();
    Instance::new(
        net,
        vec![l],
        FleetConfig::round_robin(1, cap, &[SubnetworkId(0)]),
        requests,
        Scenario::Other,
        objective,
    )
    .unwrap()
}

pub fn pdp(id: u32, t: u64, x: u32, y: u32, z: u32) -> Request {
    Request::pdp(id, t, s(x), s(y), z)
}

/// Cap requests per circuit segment, one released every round.
pub fn example_one(n: u32, cap: u32) -> Instance {
    let mut reqs = Vec::new();
    for seg in 0..n {
        for j in 0..cap {
            let i = seg * cap + j;
            reqs.push(pdp(i, u64::from(i * n), seg + 1, (seg + 1) % n + 1, 1));
        }
    }
    circuit(n, 1, cap, reqs, Objective::TotalTourLength)
}
