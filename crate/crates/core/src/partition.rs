//! Covering rules a subnetwork partition must meet for each scenario.
//!
//! The partition itself is supplied by the operator; this module only checks it.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::ModelError;
use crate::instance::Scenario;
use crate::network::{build_metric, Network, StationId, Subnetwork, SubnetworkId, SubnetworkKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StationRole {
    Parking,
    Building,
    Restaurant,
}

impl StationRole {
    pub fn parse(label: &str) -> Option<Self> {
        match label {
            "parking" => Some(StationRole::Parking),
            "building" => Some(StationRole::Building),
            "restaurant" => Some(StationRole::Restaurant),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PartitionViolation {
    Uncovered(StationId),
    ParkingCount { sub: SubnetworkId, count: usize },
    NearestParkingElsewhere { building: StationId },
    NoRestaurant,
    NotALine(SubnetworkId),
    MissesRestaurant(SubnetworkId),
    NoSubnetworks,
    NotHamiltonCircuit(SubnetworkId),
    Disjoint(SubnetworkId, SubnetworkId),
}

impl fmt::Display for PartitionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use PartitionViolation::*;
        match self {
            Uncovered(s) => write!(f, "station {s} is not covered"),
            ParkingCount { sub, count } => {
                write!(f, "subnetwork {sub} contains {count} parkings, expected exactly one")
            }
            NearestParkingElsewhere { building } => write!(
                f,
                "building {building} shares no subnetwork with a nearest parking"
            ),
            NoRestaurant => write!(f, "no station is labelled restaurant"),
            NotALine(s) => write!(f, "subnetwork {s} is not a line"),
            MissesRestaurant(s) => write!(f, "line {s} misses restaurant"),
            NoSubnetworks => write!(f, "no subnetworks given"),
            NotHamiltonCircuit(s) => {
                write!(f, "subnetwork {s} is not a circuit through every station")
            }
            Disjoint(a, b) => write!(f, "subnetworks {a} and {b} do not intersect"),
        }
    }
}

fn roles(network: &Network) -> Result<Vec<(StationId, Option<StationRole>)>, ModelError> {
    network
        .nodes()
        .iter()
        .map(|n| match n.label.as_deref() {
            None => Ok((n.id, None)),
            Some(l) => StationRole::parse(l)
                .map(|r| (n.id, Some(r)))
                .ok_or_else(|| ModelError::LabelError {
                    station: n.id,
                    label: l.to_string(),
                }),
        })
        .collect()
}

fn is_hamilton_circuit(sub: &Subnetwork, all: &BTreeSet<StationId>) -> bool {
    sub.kind() == SubnetworkKind::Circuit
        && sub.stations().len() == all.len()
        && sub.stations().iter().all(|s| all.contains(s))
}

/// Returns every rule the partition breaks for the scenario; empty means valid.
pub fn validate_partition(
    network: &Network,
    subnetworks: &[Subnetwork],
    scenario: Scenario,
) -> Result<Vec<PartitionViolation>, ModelError> {
    use PartitionViolation::*;
    let roles = roles(network)?;
    let metric = build_metric(network)?;
    let with_role = |role| -> Vec<StationId> {
        roles
            .iter()
            .filter(|(_, r)| *r == Some(role))
            .map(|(s, _)| *s)
            .collect()
    };
    let covered = |s: StationId| subnetworks.iter().any(|sub| sub.contains(s));
    let all: BTreeSet<StationId> = network.nodes().iter().map(|n| n.id).collect();
    let mut out = Vec::new();
    if subnetworks.is_empty() {
        out.push(NoSubnetworks);
        return Ok(out);
    }

    match scenario {
        Scenario::Morning | Scenario::Evening => {
            let parkings = with_role(StationRole::Parking);
            let buildings = with_role(StationRole::Building);
            for &s in parkings.iter().chain(&buildings) {
                if !covered(s) {
                    out.push(Uncovered(s));
                }
            }
            for sub in subnetworks {
                let count = parkings.iter().filter(|&&p| sub.contains(p)).count();
                if count != 1 {
                    out.push(ParkingCount { sub: sub.id(), count });
                }
            }
            for &b in &buildings {
                let Some(best) = parkings.iter().map(|&p| metric.dist(b, p)).min() else {
                    continue;
                };
                let nearest: Vec<StationId> = parkings
                    .iter()
                    .copied()
                    .filter(|&p| metric.dist(b, p) == best)
                    .collect();
                let ok = subnetworks
                    .iter()
                    .any(|sub| sub.contains(b) && nearest.iter().any(|&p| sub.contains(p)));
                if covered(b) && !ok {
                    out.push(NearestParkingElsewhere { building: b });
                }
            }
        }
        Scenario::Lunch => {
            let restaurant = with_role(StationRole::Restaurant);
            if restaurant.is_empty() {
                out.push(NoRestaurant);
            }
            for sub in subnetworks {
                if sub.kind() != SubnetworkKind::Line {
                    out.push(NotALine(sub.id()));
                }
                if !restaurant.is_empty() && !restaurant.iter().any(|&r| sub.contains(r)) {
                    out.push(MissesRestaurant(sub.id()));
                }
            }
            for b in with_role(StationRole::Building) {
                if !covered(b) {
                    out.push(Uncovered(b));
                }
            }
        }
        Scenario::Emergency => {
            // half the fleet may run the reverse circuit, so several Hamilton circuits are fine
            for sub in subnetworks {
                if !is_hamilton_circuit(sub, &all) {
                    out.push(NotHamiltonCircuit(sub.id()));
                }
            }
        }
        Scenario::Other => {
            for &s in &all {
                if !covered(s) {
                    out.push(Uncovered(s));
                }
            }
            for (i, a) in subnetworks.iter().enumerate() {
                for b in &subnetworks[i + 1..] {
                    if !a.stations().iter().any(|&s| b.contains(s)) {
                        out.push(Disjoint(a.id(), b.id()));
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Edge, Node};

    fn labelled(nodes: &[(u32, Option<&str>)], edges: &[(u32, u32, u64)]) -> Network {
        Network::new(
            nodes
                .iter()
                .map(|&(id, l)| Node {
                    id: StationId(id),
                    label: l.map(str::to_string),
                })
                .collect(),
            edges
                .iter()
                .map(|&(u, v, len)| Edge {
                    u: StationId(u),
                    v: StationId(v),
                    len,
                })
                .collect(),
            StationId(nodes[0].0),
        )
        .unwrap()
    }

    fn line(id: u32, stations: &[u32], net: &Network) -> Subnetwork {
        Subnetwork::new(
            SubnetworkId(id),
            SubnetworkKind::Line,
            stations.iter().map(|&s| StationId(s)).collect(),
            0,
            net,
        )
        .unwrap()
    }

    #[test]
    fn lunch_line_missing_restaurant() {
        // 0 restaurant, star with two arms
        let net = labelled(
            &[(0, Some("restaurant")), (1, Some("building")), (2, Some("building")), (3, None)],
            &[(0, 1, 1), (0, 2, 1), (2, 3, 1)],
        );
        let subs = vec![line(0, &[0, 1], &net), line(1, &[2, 3], &net)];
        let v = validate_partition(&net, &subs, Scenario::Lunch).unwrap();
        assert_eq!(v, vec![PartitionViolation::MissesRestaurant(SubnetworkId(1))]);
        assert_eq!(v[0].to_string(), "line 1 misses restaurant");
    }

    #[test]
    fn emergency_single_hamilton_circuit() {
        let net = labelled(&[(0, None), (1, None), (2, None)], &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]);
        let c = Subnetwork::new(
            SubnetworkId(0),
            SubnetworkKind::Circuit,
            vec![StationId(0), StationId(1), StationId(2)],
            0,
            &net,
        )
        .unwrap();
        assert!(validate_partition(&net, &[c], Scenario::Emergency).unwrap().is_empty());
        let l = line(1, &[0, 1], &net);
        assert_eq!(
            validate_partition(&net, &[l], Scenario::Emergency).unwrap(),
            vec![PartitionViolation::NotHamiltonCircuit(SubnetworkId(1))]
        );
    }

    #[test]
    fn morning_building_with_foreign_nearest_parking() {
        // P0 - B1 - B2 - P3 - B4 on a unit path: B2's nearest parking is P3 (1 vs 2)
        let net = labelled(
            &[
                (0, Some("parking")),
                (1, Some("building")),
                (2, Some("building")),
                (3, Some("parking")),
                (4, Some("building")),
            ],
            &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 1)],
        );
        let m = build_metric(&net).unwrap();
        assert!(m.dist(StationId(2), StationId(3)) < m.dist(StationId(2), StationId(0)));
        let subs = vec![line(0, &[0, 1, 2], &net), line(1, &[3, 4], &net)];
        let v = validate_partition(&net, &subs, Scenario::Morning).unwrap();
        assert_eq!(
            v,
            vec![PartitionViolation::NearestParkingElsewhere {
                building: StationId(2)
            }]
        );
        let good = vec![line(0, &[0, 1], &net), line(1, &[2, 3, 4], &net)];
        assert!(validate_partition(&net, &good, Scenario::Morning).unwrap().is_empty());
    }

    #[test]
    fn other_period_requires_intersection() {
        let net = labelled(&[(0, None), (1, None), (2, None), (3, None)], &[(0, 1, 1), (1, 2, 1), (2, 3, 1)]);
        let subs = vec![line(0, &[0, 1], &net), line(1, &[2, 3], &net)];
        assert_eq!(
            validate_partition(&net, &subs, Scenario::Other).unwrap(),
            vec![PartitionViolation::Disjoint(SubnetworkId(0), SubnetworkId(1))]
        );
    }

    #[test]
    fn unknown_label_is_an_error() {
        let net = labelled(&[(0, Some("cafeteria")), (1, None)], &[(0, 1, 1)]);
        let subs = vec![line(0, &[0, 1], &net)];
        assert!(matches!(
            validate_partition(&net, &subs, Scenario::Lunch),
            Err(ModelError::LabelError { .. })
        ));
    }
}
