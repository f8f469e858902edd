//! JSON instance documents.
//!
//! ```json
//! {
//!   "network": {"nodes": [{"id": 1, "label": "parking"}, {"id": 2}],
//!               "edges": [{"u": 1, "v": 2, "len": 1}], "depot": 1},
//!   "subnetworks": [{"id": 0, "kind": "line", "stations": [1, 2], "origin": 1}],
//!   "fleet": {"k": 1, "cap": 2},
//!   "requests": [{"id": 0, "kind": "pdp", "t": 0, "x": 1, "y": 2, "z": 1}],
//!   "scenario": "morning",
//!   "objective": "makespan"
//! }
//! ```
//!
//! `origin` is a station id. `fleet.assignment` (subnetwork id per vehicle) is
//! optional and defaults to round-robin over the listed subnetworks; `pair`
//! links a pickup request to its delivery request and back.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::ModelError;
use crate::instance::{FleetConfig, Instance, Objective, Scenario};
use crate::network::{Edge, Network, Node, StationId, Subnetwork, SubnetworkId, SubnetworkKind};
use crate::request::{Request, RequestId, RequestKind};
use crate::Tick;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed instance document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown {what} {value:?}")]
    UnknownName { what: &'static str, value: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub network: NetworkDoc,
    pub subnetworks: Vec<SubnetworkDoc>,
    pub fleet: FleetDoc,
    pub requests: Vec<RequestDoc>,
    pub scenario: String,
    pub objective: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDoc {
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
    pub depot: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub u: u32,
    pub v: u32,
    pub len: Tick,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubnetworkDoc {
    pub id: u32,
    pub kind: String,
    pub stations: Vec<u32>,
    pub origin: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetDoc {
    pub k: u32,
    pub cap: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assignment: Option<Vec<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestDoc {
    pub id: u32,
    pub kind: String,
    pub t: Tick,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Tick>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Tick>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pair: Option<u32>,
}

fn unknown(what: &'static str, value: &str) -> FormatError {
    FormatError::UnknownName {
        what,
        value: value.to_string(),
    }
}

impl InstanceDoc {
    pub fn into_instance(self) -> Result<Instance, FormatError> {
        let nodes = self
            .network
            .nodes
            .into_iter()
            .map(|n| Node {
                id: StationId(n.id),
                label: n.label,
            })
            .collect();
        let edges = self
            .network
            .edges
            .into_iter()
            .map(|e| Edge {
                u: StationId(e.u),
                v: StationId(e.v),
                len: e.len,
            })
            .collect();
        let network = Network::new(nodes, edges, StationId(self.network.depot))?;
        let mut subnetworks = Vec::new();
        for s in self.subnetworks {
            let kind = match s.kind.as_str() {
                "circuit" => SubnetworkKind::Circuit,
                "line" => SubnetworkKind::Line,
                other => return Err(unknown("subnetwork kind", other)),
            };
            subnetworks.push(Subnetwork::with_origin(
                SubnetworkId(s.id),
                kind,
                s.stations.into_iter().map(StationId).collect(),
                StationId(s.origin),
                &network,
            )?);
        }
        let ids: Vec<SubnetworkId> = subnetworks.iter().map(|s| s.id()).collect();
        let fleet = match self.fleet.assignment {
            Some(a) => FleetConfig {
                vehicles: self.fleet.k,
                capacity: self.fleet.cap,
                assignment: a.into_iter().map(SubnetworkId).collect(),
            },
            None if ids.is_empty() => {
                return Err(ModelError::BadFleet("no subnetwork to assign vehicles to".into()).into())
            }
            None => FleetConfig::round_robin(self.fleet.k, self.fleet.cap, &ids),
        };
        let requests = self
            .requests
            .into_iter()
            .map(|r| {
                let kind = match r.kind.as_str() {
                    "pickup" => RequestKind::Pickup,
                    "delivery" => RequestKind::Delivery,
                    "pdp" => RequestKind::Pdp,
                    "full" => RequestKind::Full,
                    other => return Err(unknown("request kind", other)),
                };
                Ok(Request {
                    id: RequestId(r.id),
                    kind,
                    release: r.t,
                    origin: r.x.map(StationId),
                    destination: r.y.map(StationId),
                    earliest: r.p,
                    latest: r.q,
                    load: r.z.unwrap_or(1),
                    pair: r.pair.map(RequestId),
                })
            })
            .collect::<Result<Vec<_>, FormatError>>()?;
        let scenario = Scenario::parse(&self.scenario).ok_or_else(|| unknown("scenario", &self.scenario))?;
        let objective =
            Objective::parse(&self.objective).ok_or_else(|| unknown("objective", &self.objective))?;
        Ok(Instance::new(network, subnetworks, fleet, requests, scenario, objective)?)
    }

    pub fn from_instance(inst: &Instance) -> Self {
        let net = inst.network();
        InstanceDoc {
            network: NetworkDoc {
                nodes: net
                    .nodes()
                    .iter()
                    .map(|n| NodeDoc {
                        id: n.id.0,
                        label: n.label.clone(),
                    })
                    .collect(),
                edges: net
                    .edges()
                    .iter()
                    .map(|e| EdgeDoc {
                        u: e.u.0,
                        v: e.v.0,
                        len: e.len,
                    })
                    .collect(),
                depot: net.depot().0,
            },
            subnetworks: inst
                .subnetworks()
                .iter()
                .map(|s| SubnetworkDoc {
                    id: s.id().0,
                    kind: match s.kind() {
                        SubnetworkKind::Circuit => "circuit",
                        SubnetworkKind::Line => "line",
                    }
                    .to_string(),
                    stations: s.stations().iter().map(|x| x.0).collect(),
                    origin: s.origin().0,
                })
                .collect(),
            fleet: FleetDoc {
                k: inst.fleet().vehicles,
                cap: inst.fleet().capacity,
                assignment: Some(inst.fleet().assignment.iter().map(|s| s.0).collect()),
            },
            requests: inst
                .requests()
                .iter()
                .map(|r| RequestDoc {
                    id: r.id.0,
                    kind: r.kind.as_str().to_string(),
                    t: r.release,
                    x: r.origin.map(|s| s.0),
                    y: r.destination.map(|s| s.0),
                    p: r.earliest,
                    q: r.latest,
                    z: Some(r.load),
                    pair: r.pair.map(|p| p.0),
                })
                .collect(),
            scenario: inst.scenario.as_str().to_string(),
            objective: inst.objective.as_str().to_string(),
        }
    }
}

pub fn parse_instance(text: &str) -> Result<Instance, FormatError> {
    serde_json::from_str::<InstanceDoc>(text)?.into_instance()
}

pub fn instance_to_json(inst: &Instance) -> String {
    serde_json::to_string_pretty(&InstanceDoc::from_instance(inst)).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const DOC: &str = r#"{
      "network": {"nodes": [{"id": 1, "label": "parking"}, {"id": 2}, {"id": 3}],
                  "edges": [{"u": 1, "v": 2, "len": 1}, {"u": 2, "v": 3, "len": 2}], "depot": 1},
      "subnetworks": [{"id": 0, "kind": "line", "stations": [1, 2, 3], "origin": 1}],
      "fleet": {"k": 1, "cap": 2},
      "requests": [{"id": 0, "kind": "pdp", "t": 0, "x": 1, "y": 3, "z": 2},
                   {"id": 1, "kind": "full", "t": 1, "x": 3, "y": 1, "p": 4, "q": 20, "z": 1}],
      "scenario": "morning",
      "objective": "makespan"
    }"#;

    #[test]
    fn parses_the_documented_shape() {
        let inst = parse_instance(DOC).unwrap();
        assert_eq!(inst.requests().len(), 2);
        assert_eq!(inst.subnetworks()[0].length(), 3);
        assert_eq!(inst.objective, Objective::Makespan);
        assert_eq!(inst.network().label(StationId(1)), Some("parking"));
    }

    #[test]
    fn rejects_unknown_kinds_and_fields() {
        let bad = DOC.replace("\"pdp\"", "\"taxi\"");
        assert!(matches!(parse_instance(&bad), Err(FormatError::UnknownName { .. })));
        let bad = DOC.replace("\"depot\": 1", "\"depot\": 1, \"extra\": 0");
        assert!(matches!(parse_instance(&bad), Err(FormatError::Json(_))));
        let bad = DOC.replace("\"len\": 2", "\"len\": 2.5");
        assert!(matches!(parse_instance(&bad), Err(FormatError::Json(_))));
    }

    proptest! {
        #[test]
        fn documents_survive_a_round_trip(releases in proptest::collection::vec(0u64..50, 0..6)) {
            let base = parse_instance(DOC).unwrap();
            let reqs = releases
                .iter()
                .enumerate()
                .map(|(i, &t)| Request::pdp(i as u32, t, StationId(1 + (i as u32 % 2)), StationId(3), 1))
                .collect();
            let inst = base.with_requests(reqs).unwrap();
            let doc = InstanceDoc::from_instance(&inst);
            let back = parse_instance(&instance_to_json(&inst)).unwrap();
            prop_assert_eq!(InstanceDoc::from_instance(&back), doc);
        }
    }
}
