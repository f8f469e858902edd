//! Online policies: SIR, SIF_M and SIF_E drive circuits in tram mode, MAIN
//! drives a line in elevator mode.
//!
//! All policies move one station per command so that they are re-queried at
//! every station they pass. Rides whose pickup window has not opened yet are
//! not counted as waiting until it opens.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::engine::{Policy, PolicyCommand, PolicyFactory, RideView, WorldView};
use crate::instance::{Instance, VehicleId};
use crate::network::{StationId, SubnetworkId, SubnetworkKind};
use crate::request::{RequestId, RequestKind};
use crate::Tick;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("policy needs a circuit but subnetwork {0} is a line")]
    AssignedToLine(SubnetworkId),
    #[error("policy needs a line but subnetwork {0} is a circuit")]
    AssignedToCircuit(SubnetworkId),
    #[error("the origin of line {0} is not one of its ends")]
    OriginNotAtLineEnd(SubnetworkId),
    #[error("request {0} does not start at the parking")]
    NonOriginPickup(RequestId),
    #[error("request {0} does not end at the parking")]
    NonOriginDropoff(RequestId),
    #[error("request {request} of kind {kind} is not supported by this policy")]
    UnsupportedRequest { request: RequestId, kind: &'static str },
    #[error("unknown policy {0:?}")]
    UnknownPolicy(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKind {
    Sir,
    SifM,
    SifE,
    Main,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [PolicyKind::Sir, PolicyKind::SifM, PolicyKind::SifE, PolicyKind::Main];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Sir => "sir",
            PolicyKind::SifM => "sif_m",
            PolicyKind::SifE => "sif_e",
            PolicyKind::Main => "main",
        }
    }

    pub fn parse(name: &str) -> Result<Self, PolicyError> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| PolicyError::UnknownPolicy(name.to_string()))
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl PolicyFactory for PolicyKind {
    fn build(&self, vehicle: VehicleId, instance: &Instance) -> Result<Box<dyn Policy>, PolicyError> {
        let sub = instance.vehicle_subnetwork(vehicle);
        match (self, sub.kind()) {
            (PolicyKind::Main, SubnetworkKind::Circuit) => Err(PolicyError::AssignedToCircuit(sub.id())),
            (PolicyKind::Main, SubnetworkKind::Line) if !sub.origin_at_line_end() => {
                Err(PolicyError::OriginNotAtLineEnd(sub.id()))
            }
            (PolicyKind::Main, _) => Ok(Box::new(Main::default())),
            (_, SubnetworkKind::Line) => Err(PolicyError::AssignedToLine(sub.id())),
            (PolicyKind::Sir, _) => Ok(Box::new(Sir::default())),
            (PolicyKind::SifM, _) => Ok(Box::new(SifM::default())),
            (PolicyKind::SifE, _) => Ok(Box::new(SifE::default())),
        }
    }
}

fn step(view: &WorldView<'_>, target: StationId) -> PolicyCommand {
    let next = view
        .subnetwork
        .step_toward(view.station, target)
        .expect("target differs from the current station");
    PolicyCommand::MoveTo {
        target: next,
        via: view.subnetwork.id(),
    }
}

fn next_station(view: &WorldView<'_>) -> PolicyCommand {
    PolicyCommand::MoveTo {
        target: view.subnetwork.next_on_circuit(view.station).unwrap(),
        via: view.subnetwork.id(),
    }
}

fn drop_here(view: &WorldView<'_>) -> Option<PolicyCommand> {
    let ids: Vec<RequestId> = view
        .onboard
        .iter()
        .filter(|r| r.destination == Some(view.station))
        .map(|r| r.id)
        .collect();
    (!ids.is_empty()).then_some(PolicyCommand::DropOff(ids))
}

fn is_ready(view: &WorldView<'_>, r: &RideView) -> bool {
    r.pickup_from <= view.now
}

/// Release-order first fit: takes every ride that still fits the free capacity.
fn first_fit<'r>(rides: impl IntoIterator<Item = &'r RideView>, mut free: u32) -> Vec<RequestId> {
    let mut out = Vec::new();
    for r in rides {
        if r.load <= free {
            free -= r.load;
            out.push(r.id);
        }
    }
    out
}

/// Nothing to carry: wait for a window to open, go home, or park at the depot
/// once the sequence has ended.
fn rest(view: &WorldView<'_>, home: StationId) -> PolicyCommand {
    let opens = view
        .waiting
        .iter()
        .map(|r| r.pickup_from)
        .filter(|&t| t > view.now)
        .min();
    let goal = if view.end_of_sequence && view.waiting.is_empty() && view.onboard.is_empty() {
        view.depot
    } else {
        home
    };
    match opens {
        Some(_) | None if view.station != goal => step(view, goal),
        Some(t) => PolicyCommand::WaitUntil(t),
        None => PolicyCommand::WaitForEvent,
    }
}

/// Remaining part of a circuit round in progress.
#[derive(Clone, Copy, Debug)]
struct Round {
    left: Tick,
}

impl Round {
    fn start(view: &WorldView<'_>) -> Self {
        Round {
            left: view.subnetwork.length(),
        }
    }

    fn finished(&self) -> bool {
        self.left == 0
    }

    /// Whether `y` is still ahead before the round closes at the origin.
    fn ahead(&self, view: &WorldView<'_>, y: StationId) -> bool {
        let sub = view.subnetwork;
        let done = sub.length() - self.left;
        let off = match sub.offset_from_origin(y) {
            Some(0) => sub.length(),
            Some(o) => o,
            None => return false,
        };
        off > done
    }

    fn advance(&mut self, view: &WorldView<'_>) -> PolicyCommand {
        let cmd = next_station(view);
        if let PolicyCommand::MoveTo { target, .. } = cmd {
            self.left -= view.subnetwork.step_length(view.station, target).unwrap();
        }
        cmd
    }
}

/// Stop If Requested.
///
/// Rides waiting when a round starts are picked up wherever they are, even if
/// that means riding past the origin into the next round. Rides released
/// during a round board only if their destination is still ahead.
#[derive(Debug, Default)]
pub struct Sir {
    round: Option<Round>,
    committed: BTreeSet<RequestId>,
}

impl Policy for Sir {
    fn decide(&mut self, view: &WorldView<'_>) -> Result<PolicyCommand, PolicyError> {
        let origin = view.subnetwork.origin();
        if let Some(cmd) = drop_here(view) {
            return Ok(cmd);
        }
        if self.round.is_some_and(|r| r.finished()) {
            self.round = None;
        }
        if self.round.is_none() {
            let busy = !view.onboard.is_empty() || view.waiting.iter().any(|r| is_ready(view, r));
            if view.station != origin || !busy {
                return Ok(rest(view, origin));
            }
            self.round = Some(Round::start(view));
            self.committed = view
                .waiting
                .iter()
                .filter(|r| is_ready(view, r))
                .map(|r| r.id)
                .collect();
        }
        let round = self.round.as_mut().unwrap();
        let committed = &self.committed;
        let boarding = first_fit(
            view.waiting.iter().filter(|r| {
                r.origin == view.station
                    && is_ready(view, r)
                    && (committed.contains(&r.id) || r.destination.is_none_or(|y| round.ahead(view, y)))
            }),
            view.capacity - view.load,
        );
        if !boarding.is_empty() {
            return Ok(PolicyCommand::PickUp(boarding));
        }
        Ok(round.advance(view))
    }
}

/// Start If Fully loaded, morning variant: passengers board at the parking.
#[derive(Debug, Default)]
pub struct SifM {
    round: Option<Round>,
}

impl Policy for SifM {
    fn decide(&mut self, view: &WorldView<'_>) -> Result<PolicyCommand, PolicyError> {
        let origin = view.subnetwork.origin();
        if let Some(r) = view.waiting.iter().find(|r| r.origin != origin) {
            return Err(PolicyError::NonOriginPickup(r.id));
        }
        if let Some(cmd) = drop_here(view) {
            return Ok(cmd);
        }
        if let Some(round) = self.round.as_mut() {
            if !round.finished() {
                return Ok(round.advance(view));
            }
            self.round = None;
        }
        if view.station != origin {
            return Ok(rest(view, origin));
        }
        let ready: Vec<&RideView> = view.waiting.iter().filter(|r| is_ready(view, r)).collect();
        let boarding = first_fit(ready.iter().copied(), view.capacity - view.load);
        if !boarding.is_empty() {
            return Ok(PolicyCommand::PickUp(boarding));
        }
        let blocked = !ready.is_empty();
        let all_in = view.end_of_sequence && view.waiting.is_empty();
        if view.load > 0 && (view.load == view.capacity || blocked || all_in) {
            let mut round = Round::start(view);
            let cmd = round.advance(view);
            self.round = Some(round);
            return Ok(cmd);
        }
        if view.load > 0 {
            // waiting at the parking with a partial load
            return Ok(match view.waiting.iter().map(|r| r.pickup_from).min() {
                Some(t) if t > view.now => PolicyCommand::WaitUntil(t),
                _ => PolicyCommand::WaitForEvent,
            });
        }
        Ok(rest(view, origin))
    }
}

/// Start If Fully loaded, evening variant: call-boxes report loads, passengers
/// are collected along the round and brought to the parking.
#[derive(Debug, Default)]
pub struct SifE {
    round: Option<Round>,
    planned: BTreeSet<RequestId>,
}

impl Policy for SifE {
    fn decide(&mut self, view: &WorldView<'_>) -> Result<PolicyCommand, PolicyError> {
        let origin = view.subnetwork.origin();
        for r in view.waiting.iter().chain(&view.onboard) {
            if r.kind == RequestKind::Pickup {
                return Err(PolicyError::UnsupportedRequest {
                    request: r.id,
                    kind: r.kind.as_str(),
                });
            }
            if r.destination.is_some_and(|y| y != origin) {
                return Err(PolicyError::NonOriginDropoff(r.id));
            }
        }
        if let Some(cmd) = drop_here(view) {
            return Ok(cmd);
        }
        if self.round.is_some_and(|r| r.finished()) {
            self.round = None;
            self.planned.clear();
        }
        if self.round.is_none() {
            let ready: Vec<&RideView> = view.waiting.iter().filter(|r| is_ready(view, r)).collect();
            let total: u32 = ready.iter().map(|r| r.load).sum();
            let flush = view.end_of_sequence && total > 0;
            if view.station != origin || !(total >= view.capacity || flush) {
                return Ok(rest(view, origin));
            }
            self.planned = first_fit(ready, view.capacity).into_iter().collect();
            self.round = Some(Round::start(view));
        }
        let boarding: Vec<RequestId> = view
            .waiting
            .iter()
            .filter(|r| r.origin == view.station && self.planned.contains(&r.id))
            .map(|r| r.id)
            .collect();
        if !boarding.is_empty() {
            return Ok(PolicyCommand::PickUp(boarding));
        }
        Ok(self.round.as_mut().unwrap().advance(view))
    }
}

#[derive(Clone, Debug)]
enum Phase {
    /// Serving away-direction requests up to the furthest destination.
    Away { riders: BTreeSet<RequestId>, target: StationId },
    /// Driving out to the furthest toward-origin pickup.
    Out { riders: BTreeSet<RequestId>, turn: StationId },
    /// Sweeping back to the origin, boarding toward-origin requests.
    Back { riders: BTreeSet<RequestId> },
}

/// Move Away If Necessary.
#[derive(Debug, Default)]
pub struct Main {
    phase: Option<Phase>,
}

impl Main {
    fn plan(view: &WorldView<'_>) -> Option<Phase> {
        let sub = view.subnetwork;
        let pos = |s: StationId| sub.offset_from_origin(s).unwrap();
        let here = pos(view.station);
        let pending: Vec<&RideView> = view.waiting.iter().filter(|r| is_ready(view, r)).collect();
        if pending.is_empty() {
            return None;
        }
        let y = |r: &RideView| r.destination.expect("MAIN only sees rides with known destinations");
        let away: Vec<&RideView> = pending
            .iter()
            .copied()
            .filter(|r| here <= pos(r.origin) && pos(r.origin) <= pos(y(r)))
            .collect();
        if !away.is_empty() {
            let riders: BTreeSet<RequestId> = first_fit(away.iter().copied(), view.capacity).into_iter().collect();
            let target = away
                .iter()
                .filter(|r| riders.contains(&r.id))
                .map(|r| y(r))
                .max_by_key(|&s| pos(s))
                .unwrap();
            return Some(Phase::Away { riders, target });
        }
        let toward: Vec<&RideView> = pending
            .iter()
            .copied()
            .filter(|r| pos(r.origin) > pos(y(r)))
            .collect();
        let riders: BTreeSet<RequestId> = first_fit(toward.iter().copied(), view.capacity).into_iter().collect();
        let turn = toward
            .iter()
            .filter(|r| riders.contains(&r.id))
            .map(|r| r.origin)
            .max_by_key(|&s| pos(s));
        Some(match turn {
            Some(turn) if pos(turn) > here => Phase::Out { riders, turn },
            _ => Phase::Back { riders },
        })
    }
}

impl Policy for Main {
    fn decide(&mut self, view: &WorldView<'_>) -> Result<PolicyCommand, PolicyError> {
        for r in &view.waiting {
            if r.destination.is_none() {
                return Err(PolicyError::UnsupportedRequest {
                    request: r.id,
                    kind: r.kind.as_str(),
                });
            }
        }
        if let Some(cmd) = drop_here(view) {
            return Ok(cmd);
        }
        let origin = view.subnetwork.origin();
        let boarding = |riders: &BTreeSet<RequestId>| {
            first_fit(
                view.waiting
                    .iter()
                    .filter(|r| r.origin == view.station && riders.contains(&r.id) && is_ready(view, r)),
                view.capacity - view.load,
            )
        };
        loop {
            match &self.phase {
                None => match Main::plan(view) {
                    Some(p) => self.phase = Some(p),
                    None => return Ok(rest(view, view.station)),
                },
                Some(Phase::Away { riders, target }) => {
                    let ids = boarding(riders);
                    if !ids.is_empty() {
                        return Ok(PolicyCommand::PickUp(ids));
                    }
                    if view.station != *target {
                        return Ok(step(view, *target));
                    }
                    self.phase = None;
                }
                Some(Phase::Out { riders, turn }) => {
                    if view.station != *turn {
                        return Ok(step(view, *turn));
                    }
                    self.phase = Some(Phase::Back {
                        riders: riders.clone(),
                    });
                }
                Some(Phase::Back { riders }) => {
                    let ids = boarding(riders);
                    if !ids.is_empty() {
                        return Ok(PolicyCommand::PickUp(ids));
                    }
                    if view.station != origin {
                        return Ok(step(view, origin));
                    }
                    self.phase = None;
                }
            }
        }
    }
}
