use thiserror::Error;

use crate::network::{StationId, SubnetworkId};
use crate::request::RequestId;

/// Errors raised while building or querying the static world model.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("network is not connected")]
    GraphNotConnected,
    #[error("network has no nodes")]
    EmptyNetwork,
    #[error("duplicate station {0}")]
    DuplicateStation(StationId),
    #[error("unknown station {0}")]
    UnknownStation(StationId),
    #[error("edge {0}-{1} is a self-loop")]
    SelfLoop(StationId, StationId),
    #[error("edge {0}-{1} appears more than once")]
    DuplicateEdge(StationId, StationId),
    #[error("edge {0}-{1} has zero length")]
    ZeroLengthEdge(StationId, StationId),
    #[error("subnetwork {sub}: {reason}")]
    BadSubnetwork { sub: SubnetworkId, reason: String },
    #[error("duplicate subnetwork id {0}")]
    DuplicateSubnetwork(SubnetworkId),
    #[error("unknown subnetwork {0}")]
    UnknownSubnetwork(SubnetworkId),
    #[error("station {station} is not on subnetwork {sub}")]
    NotOnSubnetwork { sub: SubnetworkId, station: StationId },
    #[error("subnetwork {0} is not a circuit")]
    NotACircuit(SubnetworkId),
    #[error("request {request}: {reason}")]
    BadRequest { request: RequestId, reason: String },
    #[error("duplicate request id {0}")]
    DuplicateRequest(RequestId),
    #[error("no subnetwork covers request {0}")]
    NoCoveringSubnetwork(RequestId),
    #[error("request {0} has an infeasible time window")]
    InfeasibleWindow(RequestId),
    #[error("request {request} carries {load} passengers but capacity is {capacity}")]
    LoadExceedsCapacity {
        request: RequestId,
        load: u32,
        capacity: u32,
    },
    #[error("bad fleet configuration: {0}")]
    BadFleet(String),
    #[error("depot {depot} is not on subnetwork {sub}")]
    DepotOffSubnetwork { depot: StationId, sub: SubnetworkId },
    #[error("unknown station label {label:?} on station {station}")]
    LabelError { station: StationId, label: String },
}
