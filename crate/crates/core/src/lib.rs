//! Online fleet routing on circuits and lines.
//!
//! The crate is organised bottom-up:
//!
//! - [`network`]: stations, edges, shortest-path metric and circuit/line overlays.
//! - [`request`], [`instance`]: customer requests, operator tasks and the instance container.
//! - [`partition`]: scenario-specific checks on a supplied subnetwork partition.
//! - [`schedule`]: moves, actions, tours and schedules, with validation and both objectives.
//! - [`engine`]: the event-driven online simulation loop and its trace.
//! - [`algorithms`]: the tram-mode and elevator-mode dispatch policies.
//! - [`oracle`]: the exact clairvoyant optimum and competitive ratios.
//!
//! All times and distances are integer ticks; vehicles travel one distance unit per tick.

pub mod algorithms;
pub mod engine;
mod error;
pub mod format;
pub mod instance;
pub mod network;
pub mod oracle;
pub mod partition;
pub mod request;
pub mod schedule;

pub use error::ModelError;
pub use instance::{FleetConfig, Instance, Objective, Ride, Scenario, VehicleId};
pub use network::{MetricClosure, Network, StationId, Subnetwork, SubnetworkId, SubnetworkKind};
pub use request::{Request, RequestId, RequestKind, Task, TaskKind};

/// Integer time and distance unit.
pub type Tick = u64;
