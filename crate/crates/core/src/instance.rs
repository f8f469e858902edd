//! Fleet configuration and the instance container.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use crate::error::ModelError;
use crate::network::{build_metric, MetricClosure, Network, StationId, Subnetwork, SubnetworkId};
use crate::request::{Request, RequestId, RequestKind};
use crate::Tick;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VehicleId(pub u32);

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `k` unit-speed vehicles of capacity `Cap`, each bound to one subnetwork.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FleetConfig {
    pub vehicles: u32,
    pub capacity: u32,
    /// Subnetwork of each vehicle, indexed by vehicle id.
    pub assignment: Vec<SubnetworkId>,
}

impl FleetConfig {
    /// Vehicles are spread round-robin over the listed subnetworks.
    pub fn round_robin(vehicles: u32, capacity: u32, subnetworks: &[SubnetworkId]) -> Self {
        let assignment = (0..vehicles as usize)
            .map(|j| subnetworks[j % subnetworks.len().max(1)])
            .collect();
        FleetConfig {
            vehicles,
            capacity,
            assignment,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scenario {
    Morning,
    Evening,
    Lunch,
    Emergency,
    Other,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Morning => "morning",
            Scenario::Evening => "evening",
            Scenario::Lunch => "lunch",
            Scenario::Emergency => "emergency",
            Scenario::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "morning" => Scenario::Morning,
            "evening" => Scenario::Evening,
            "lunch" => Scenario::Lunch,
            "emergency" => Scenario::Emergency,
            "other" => Scenario::Other,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Objective {
    TotalTourLength,
    Makespan,
}

impl Objective {
    pub fn as_str(self) -> &'static str {
        match self {
            Objective::TotalTourLength => "length",
            Objective::Makespan => "makespan",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "length" | "total_tour_length" => Some(Objective::TotalTourLength),
            "makespan" => Some(Objective::Makespan),
            _ => None,
        }
    }
}

/// One passenger group travelling from an origin to a destination.
///
/// A pdp or full request is one ride; a pickup request and its paired
/// delivery request together form one ride whose destination only becomes
/// known when the delivery request is released.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ride {
    /// Id of the pickup-side request; used in action logs and service maps.
    pub id: RequestId,
    pub delivery_request: Option<RequestId>,
    pub kind: RequestKind,
    pub origin: StationId,
    pub destination: StationId,
    pub load: u32,
    pub release: Tick,
    /// First tick a pickup may happen: `max(t, p)`.
    pub pickup_from: Tick,
    /// Tick at which the destination is revealed and delivery becomes allowed.
    pub destination_from: Tick,
    /// Latest delivery tick `q`, if any.
    pub deadline: Option<Tick>,
    /// Latest pickup tick `q - d(x, y)`, if any.
    pub latest_pickup: Option<Tick>,
}

impl Ride {
    pub fn covered_by(&self, sub: &Subnetwork) -> bool {
        sub.contains(self.origin) && sub.contains(self.destination)
    }
}

/// Network, subnetworks, fleet and the release-ordered request sequence.
#[derive(Clone, Debug)]
pub struct Instance {
    network: Network,
    metric: MetricClosure,
    subnetworks: Vec<Subnetwork>,
    fleet: FleetConfig,
    requests: Vec<Request>,
    rides: Vec<Ride>,
    pub scenario: Scenario,
    pub objective: Objective,
}

impl Instance {
    pub fn new(
        network: Network,
        subnetworks: Vec<Subnetwork>,
        fleet: FleetConfig,
        mut requests: Vec<Request>,
        scenario: Scenario,
        objective: Objective,
    ) -> Result<Self, ModelError> {
        let metric = build_metric(&network)?;
        let mut sub_ids = HashSet::new();
        for sub in &subnetworks {
            if !sub_ids.insert(sub.id()) {
                return Err(ModelError::DuplicateSubnetwork(sub.id()));
            }
        }
        if fleet.vehicles == 0 {
            return Err(ModelError::BadFleet("at least one vehicle is required".into()));
        }
        if fleet.capacity == 0 {
            return Err(ModelError::BadFleet("capacity must be at least 1".into()));
        }
        if fleet.assignment.len() != fleet.vehicles as usize {
            return Err(ModelError::BadFleet(format!(
                "{} vehicles but {} subnetwork assignments",
                fleet.vehicles,
                fleet.assignment.len()
            )));
        }
        for &sid in &fleet.assignment {
            let sub = subnetworks
                .iter()
                .find(|s| s.id() == sid)
                .ok_or(ModelError::UnknownSubnetwork(sid))?;
            if !sub.contains(network.depot()) {
                return Err(ModelError::DepotOffSubnetwork {
                    depot: network.depot(),
                    sub: sid,
                });
            }
        }

        requests.sort_by_key(|r| (r.release, r.id));
        let mut ids = HashSet::new();
        for r in &requests {
            if !ids.insert(r.id) {
                return Err(ModelError::DuplicateRequest(r.id));
            }
            r.validate(&metric)?;
            if r.load > fleet.capacity {
                return Err(ModelError::LoadExceedsCapacity {
                    request: r.id,
                    load: r.load,
                    capacity: fleet.capacity,
                });
            }
        }
        let rides = build_rides(&requests, &metric)?;
        let instance = Instance {
            network,
            metric,
            subnetworks,
            fleet,
            requests,
            rides,
            scenario,
            objective,
        };
        for ride in &instance.rides {
            if instance.vehicle_for(ride).is_none() {
                return Err(ModelError::NoCoveringSubnetwork(ride.id));
            }
        }
        Ok(instance)
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn metric(&self) -> &MetricClosure {
        &self.metric
    }

    pub fn depot(&self) -> StationId {
        self.network.depot()
    }

    pub fn subnetworks(&self) -> &[Subnetwork] {
        &self.subnetworks
    }

    pub fn subnetwork(&self, id: SubnetworkId) -> Option<&Subnetwork> {
        self.subnetworks.iter().find(|s| s.id() == id)
    }

    pub fn fleet(&self) -> &FleetConfig {
        &self.fleet
    }

    pub fn capacity(&self) -> u32 {
        self.fleet.capacity
    }

    pub fn vehicles(&self) -> impl Iterator<Item = VehicleId> {
        (0..self.fleet.vehicles).map(VehicleId)
    }

    /// The subnetwork a vehicle is bound to.
    pub fn vehicle_subnetwork(&self, v: VehicleId) -> &Subnetwork {
        let sid = self.fleet.assignment[v.0 as usize];
        self.subnetwork(sid).expect("assignment validated at construction")
    }

    /// Requests in release order, ties by id.
    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn request(&self, id: RequestId) -> Option<&Request> {
        self.requests.iter().find(|r| r.id == id)
    }

    /// Rides in release order of their pickup side.
    pub fn rides(&self) -> &[Ride] {
        &self.rides
    }

    pub fn ride(&self, id: RequestId) -> Option<&Ride> {
        self.rides.iter().find(|r| r.id == id)
    }

    /// Lowest-id vehicle whose subnetwork covers the ride.
    pub fn vehicle_for(&self, ride: &Ride) -> Option<VehicleId> {
        self.vehicles()
            .find(|&v| ride.covered_by(self.vehicle_subnetwork(v)))
    }

    pub fn last_release(&self) -> Option<Tick> {
        self.requests.iter().map(|r| r.release).max()
    }

    /// Same world with a different request sequence.
    pub fn with_requests(&self, requests: Vec<Request>) -> Result<Self, ModelError> {
        Instance::new(
            self.network.clone(),
            self.subnetworks.clone(),
            self.fleet.clone(),
            requests,
            self.scenario,
            self.objective,
        )
    }
}

fn build_rides(requests: &[Request], metric: &MetricClosure) -> Result<Vec<Ride>, ModelError> {
    let by_id: BTreeMap<RequestId, &Request> = requests.iter().map(|r| (r.id, r)).collect();
    let bad = |id, reason: &str| ModelError::BadRequest {
        request: id,
        reason: reason.to_string(),
    };
    let mut rides = Vec::new();
    for r in requests {
        match r.kind {
            RequestKind::Pdp | RequestKind::Full => {
                let (x, y) = (r.origin.unwrap(), r.destination.unwrap());
                let pickup_from = r.release.max(r.earliest.unwrap_or(0));
                rides.push(Ride {
                    id: r.id,
                    delivery_request: None,
                    kind: r.kind,
                    origin: x,
                    destination: y,
                    load: r.load,
                    release: r.release,
                    pickup_from,
                    destination_from: r.release,
                    deadline: r.latest,
                    latest_pickup: r.latest.map(|q| q.saturating_sub(metric.dist(x, y))),
                });
            }
            RequestKind::Pickup => {
                let did = r.pair.expect("validated");
                let d = by_id
                    .get(&did)
                    .ok_or_else(|| bad(r.id, "paired delivery request is missing"))?;
                if d.kind != RequestKind::Delivery || d.pair != Some(r.id) {
                    return Err(bad(r.id, "pair must be a delivery request pointing back"));
                }
                let (x, y) = (r.origin.unwrap(), d.destination.unwrap());
                if x == y {
                    return Err(bad(r.id, "origin equals destination"));
                }
                rides.push(Ride {
                    id: r.id,
                    delivery_request: Some(d.id),
                    kind: RequestKind::Pickup,
                    origin: x,
                    destination: y,
                    load: 1,
                    release: r.release,
                    pickup_from: r.release,
                    destination_from: d.release,
                    deadline: None,
                    latest_pickup: None,
                });
            }
            RequestKind::Delivery => {
                let pid = r.pair.expect("validated");
                let p = by_id
                    .get(&pid)
                    .ok_or_else(|| bad(r.id, "paired pickup request is missing"))?;
                if p.kind != RequestKind::Pickup || p.pair != Some(r.id) {
                    return Err(bad(r.id, "pair must be a pickup request pointing back"));
                }
            }
        }
    }
    Ok(rides)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::SubnetworkKind;

    fn circuit_world() -> (Network, Vec<Subnetwork>) {
        let net = Network::from_edges(1..=4, [(1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 1, 1)], 1).unwrap();
        let c = Subnetwork::new(
            SubnetworkId(0),
            SubnetworkKind::Circuit,
            (1..=4).map(StationId).collect(),
            0,
            &net,
        )
        .unwrap();
        (net, vec![c])
    }

    #[test]
    fn requests_are_sorted_and_rides_built() {
        let (net, subs) = circuit_world();
        let fleet = FleetConfig::round_robin(1, 2, &[SubnetworkId(0)]);
        let reqs = vec![
            Request::pdp(3, 5, StationId(2), StationId(3), 1),
            Request::pickup(1, 2, StationId(1), 2),
            Request::delivery(2, 4, StationId(3), 1),
            Request::pdp(0, 5, StationId(4), StationId(1), 2),
        ];
        let inst = Instance::new(net, subs, fleet, reqs, Scenario::Other, Objective::Makespan).unwrap();
        let order: Vec<u32> = inst.requests().iter().map(|r| r.id.0).collect();
        assert_eq!(order, vec![1, 2, 0, 3]);
        assert_eq!(inst.rides().len(), 3);
        let paired = inst.ride(RequestId(1)).unwrap();
        assert_eq!(paired.destination, StationId(3));
        assert_eq!(paired.destination_from, 4);
    }

    #[test]
    fn overloaded_request_is_rejected() {
        let (net, subs) = circuit_world();
        let fleet = FleetConfig::round_robin(1, 2, &[SubnetworkId(0)]);
        let reqs = vec![Request::pdp(0, 0, StationId(1), StationId(2), 3)];
        assert!(matches!(
            Instance::new(net, subs, fleet, reqs, Scenario::Other, Objective::Makespan),
            Err(ModelError::LoadExceedsCapacity { .. })
        ));
    }

    #[test]
    fn depot_must_lie_on_assigned_subnetworks() {
        let net = Network::from_edges(0..3, [(0, 1, 1), (1, 2, 1)], 0).unwrap();
        let line = Subnetwork::new(
            SubnetworkId(0),
            SubnetworkKind::Line,
            vec![StationId(1), StationId(2)],
            0,
            &net,
        )
        .unwrap();
        let fleet = FleetConfig::round_robin(1, 1, &[SubnetworkId(0)]);
        assert!(matches!(
            Instance::new(net, vec![line], fleet, vec![], Scenario::Other, Objective::Makespan),
            Err(ModelError::DepotOffSubnetwork { .. })
        ));
    }

    #[test]
    fn unpaired_pickup_is_rejected() {
        let (net, subs) = circuit_world();
        let fleet = FleetConfig::round_robin(1, 2, &[SubnetworkId(0)]);
        let reqs = vec![Request::pickup(1, 0, StationId(1), 9)];
        assert!(Instance::new(net, subs, fleet, reqs, Scenario::Other, Objective::Makespan).is_err());
    }
}
