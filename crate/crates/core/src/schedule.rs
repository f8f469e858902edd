//! Moves, actions, tours and schedules.
//!
//! A tour alternates moves and actions, `m1 a1 m2 ... a(n-1) mn`, starts and
//! ends at the depot and belongs to a single vehicle. Waiting shows up as a
//! gap between an action and the next departure, or as a stay move
//! (origin = destination, single-station path) between two actions at one
//! station.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::instance::{Instance, VehicleId};
use crate::network::{StationId, SubnetworkId, SubnetworkKind};
use crate::request::RequestId;
use crate::Tick;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub vehicle: VehicleId,
    pub station: StationId,
    pub time: Tick,
    /// Passengers boarding (positive) or leaving (negative).
    pub delta: i64,
    pub duration: Tick,
    /// Signed per-request counts summing to `delta`; deliveries first, then ascending id.
    pub served: Vec<(RequestId, i64)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Move {
    pub vehicle: VehicleId,
    pub origin: StationId,
    pub departure: Tick,
    pub destination: StationId,
    pub arrival: Tick,
    pub path: Vec<StationId>,
    pub subnetwork: SubnetworkId,
    pub load: u32,
}

impl Move {
    pub fn is_stay(&self) -> bool {
        self.path.len() <= 1
    }

    /// Driven distance; validation ties `arrival - departure` to the path length.
    pub fn distance(&self) -> Tick {
        if self.is_stay() {
            0
        } else {
            self.arrival.saturating_sub(self.departure)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tour {
    pub vehicle: VehicleId,
    pub moves: Vec<Move>,
    pub actions: Vec<Action>,
}

impl Tour {
    /// Tour of a vehicle that never leaves the depot.
    pub fn idle(vehicle: VehicleId, depot: StationId, subnetwork: SubnetworkId) -> Self {
        Tour {
            vehicle,
            moves: vec![Move {
                vehicle,
                origin: depot,
                departure: 0,
                destination: depot,
                arrival: 0,
                path: vec![depot],
                subnetwork,
                load: 0,
            }],
            actions: Vec::new(),
        }
    }

    pub fn length(&self) -> Tick {
        self.moves.iter().map(Move::distance).sum()
    }

    pub fn end_time(&self) -> Tick {
        self.moves.last().map_or(0, |m| m.arrival)
    }

    /// Every station passed, in order, with consecutive duplicates removed.
    pub fn station_walk(&self) -> Vec<StationId> {
        let mut walk: Vec<StationId> = Vec::new();
        for m in &self.moves {
            for &s in &m.path {
                if walk.last() != Some(&s) {
                    walk.push(s);
                }
            }
        }
        walk
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct ActionRef {
    pub vehicle: VehicleId,
    pub index: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ServiceRecord {
    pub pickup: ActionRef,
    pub delivery: ActionRef,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Schedule {
    pub tours: Vec<Tour>,
    /// Request id to the actions that served it; both halves of a paired
    /// pickup/delivery request map to the same record.
    pub service: BTreeMap<RequestId, ServiceRecord>,
}

impl Schedule {
    pub fn action(&self, r: ActionRef) -> Option<&Action> {
        self.tours.get(r.vehicle.0 as usize)?.actions.get(r.index)
    }

    /// Row-per-move/action text dump, one header line then
    /// `vehicle kind from to|station depart|time arrive|- load|delta requests`.
    pub fn dump(&self) -> String {
        let mut out = String::from("# vehicle kind from to depart arrive load requests\n");
        for tour in &self.tours {
            for (i, m) in tour.moves.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{} move {} {} {} {} {} -",
                    m.vehicle, m.origin, m.destination, m.departure, m.arrival, m.load
                );
                if let Some(a) = tour.actions.get(i) {
                    let served = if a.served.is_empty() {
                        "-".to_string()
                    } else {
                        a.served
                            .iter()
                            .map(|(r, z)| format!("{r}:{z:+}"))
                            .collect::<Vec<_>>()
                            .join(",")
                    };
                    let _ = writeln!(
                        out,
                        "{} action - {} {} - {:+} {}",
                        a.vehicle, a.station, a.time, a.delta, served
                    );
                }
            }
        }
        out
    }
}

pub fn total_length(schedule: &Schedule) -> Tick {
    schedule.tours.iter().map(Tour::length).sum()
}

/// Latest depot return over all tours.
pub fn makespan(schedule: &Schedule) -> Tick {
    schedule.tours.iter().map(Tour::end_time).max().unwrap_or(0)
}

pub fn cost(schedule: &Schedule, objective: crate::Objective) -> Tick {
    match objective {
        crate::Objective::TotalTourLength => total_length(schedule),
        crate::Objective::Makespan => makespan(schedule),
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ValidationOptions {
    /// Require `dep(m[i+1]) == t(a[i]) + dur(a[i])` instead of `>=`.
    pub strict_departures: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Shape { moves: usize, actions: usize },
    WrongVehicle { item: String },
    UnknownSubnetwork { mv: usize, sub: SubnetworkId },
    OffSubnetwork { mv: usize, station: StationId },
    PathEndpoints { mv: usize },
    Direction { mv: usize, from: StationId, to: StationId },
    NotAnEdge { mv: usize, from: StationId, to: StationId },
    TravelTime { mv: usize, expected: Tick, actual: Tick },
    StayBackwards { mv: usize },
    MoveOverload { mv: usize, load: u32 },
    Chain { action: usize },
    ArrivalMismatch { action: usize },
    EarlyDeparture { action: usize },
    LateDeparture { action: usize },
    LoadChain { action: usize },
    ActionOverload { action: usize },
    DeltaMismatch { action: usize },
    StartNotAtDepot,
    EndNotAtDepot,
    StartLoaded,
    EndLoaded,
    TourCount { expected: usize, actual: usize },
    TourOrder { index: usize },
    Tour { vehicle: VehicleId, violation: Box<Violation> },
    Unserved(RequestId),
    UnknownRequest(RequestId),
    DanglingRef(RequestId),
    PairMismatch(RequestId),
    Preemptive(RequestId),
    DeliveryBeforePickup(RequestId),
    WrongStation { request: RequestId, pickup: bool },
    WrongCount { request: RequestId, pickup: bool },
    BeforeRelease { request: RequestId, time: Tick, release: Tick },
    PickupOutsideWindow { request: RequestId },
    LateDelivery { request: RequestId },
    UnaccountedService { vehicle: VehicleId, action: usize, request: RequestId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        // messages index moves and actions from 1
        match self {
            Shape { moves, actions } => {
                write!(f, "tour has {moves} moves and {actions} actions, expected n and n-1")
            }
            WrongVehicle { item } => write!(f, "{item} belongs to another vehicle"),
            UnknownSubnetwork { mv, sub } => write!(f, "m{}: unknown subnetwork {sub}", mv + 1),
            OffSubnetwork { mv, station } => {
                write!(f, "m{}: station {station} is off its subnetwork", mv + 1)
            }
            PathEndpoints { mv } => write!(f, "m{}: path does not join origin and destination", mv + 1),
            Direction { mv, from, to } => {
                write!(f, "m{}: direction {from}->{to} against the circuit", mv + 1)
            }
            NotAnEdge { mv, from, to } => write!(f, "m{}: {from}-{to} is not a subnetwork edge", mv + 1),
            TravelTime { mv, expected, actual } => write!(
                f,
                "m{}: arr(m) - dep(m) = {actual}, path length is {expected}",
                mv + 1
            ),
            StayBackwards { mv } => write!(f, "m{}: arrives before it departs", mv + 1),
            MoveOverload { mv, load } => write!(f, "m{}: load {load} exceeds capacity", mv + 1),
            Chain { action } => write!(
                f,
                "dest(m{0}) = loc(a{0}) = orig(m{1}) broken",
                action + 1,
                action + 2
            ),
            ArrivalMismatch { action } => write!(f, "arr(m{0}) != t(a{0})", action + 1),
            EarlyDeparture { action } => write!(
                f,
                "dep(m{}) < t(a{})+dur(a{})",
                action + 2,
                action + 1,
                action + 1
            ),
            LateDeparture { action } => write!(
                f,
                "dep(m{}) != t(a{})+dur(a{})",
                action + 2,
                action + 1,
                action + 1
            ),
            LoadChain { action } => write!(
                f,
                "load(m{}) != load(m{}) + dz(a{})",
                action + 2,
                action + 1,
                action + 1
            ),
            ActionOverload { action } => write!(f, "a{}: |dz| exceeds capacity", action + 1),
            DeltaMismatch { action } => write!(f, "a{}: dz differs from its served counts", action + 1),
            StartNotAtDepot => write!(f, "first move does not leave the depot"),
            EndNotAtDepot => write!(f, "last move does not reach the depot"),
            StartLoaded => write!(f, "first move departs loaded"),
            EndLoaded => write!(f, "last move arrives loaded"),
            TourCount { expected, actual } => write!(f, "expected {expected} tours, found {actual}"),
            TourOrder { index } => write!(f, "tour {index} belongs to a different vehicle"),
            Tour { vehicle, violation } => write!(f, "vehicle {vehicle}: {violation}"),
            Unserved(r) => write!(f, "unserved request {r}"),
            UnknownRequest(r) => write!(f, "service map names unknown request {r}"),
            DanglingRef(r) => write!(f, "request {r}: service map points at a missing action"),
            PairMismatch(r) => write!(f, "request {r}: paired requests disagree on their service"),
            Preemptive(r) => write!(f, "request {r}: picked and delivered by different vehicles"),
            DeliveryBeforePickup(r) => write!(f, "request {r}: delivery does not follow pickup"),
            WrongStation { request, pickup } => write!(
                f,
                "request {request}: {} at the wrong station",
                if *pickup { "pickup" } else { "delivery" }
            ),
            WrongCount { request, pickup } => write!(
                f,
                "request {request}: {} action moves the wrong passenger count",
                if *pickup { "pickup" } else { "delivery" }
            ),
            BeforeRelease { request, time, release } => write!(
                f,
                "request {request}: served at {time} before its release {release}"
            ),
            PickupOutsideWindow { request } => write!(f, "request {request}: pickup outside [p, q-d(x,y)]"),
            LateDelivery { request } => write!(f, "request {request}: delivered after q"),
            UnaccountedService { vehicle, action, request } => write!(
                f,
                "vehicle {vehicle} a{}: serves request {request} outside the service map",
                action + 1
            ),
        }
    }
}

/// Checks every move, action and chaining condition of one tour.
pub fn validate_tour(tour: &Tour, instance: &Instance, opts: ValidationOptions) -> Vec<Violation> {
    use Violation::*;
    let mut out = Vec::new();
    let cap = instance.capacity();
    let depot = instance.depot();
    if tour.moves.is_empty() || tour.moves.len() != tour.actions.len() + 1 {
        out.push(Shape {
            moves: tour.moves.len(),
            actions: tour.actions.len(),
        });
        return out;
    }

    for (i, m) in tour.moves.iter().enumerate() {
        if m.vehicle != tour.vehicle {
            out.push(WrongVehicle {
                item: format!("m{}", i + 1),
            });
        }
        if m.load > cap {
            out.push(MoveOverload { mv: i, load: m.load });
        }
        if m.path.first() != Some(&m.origin) || m.path.last() != Some(&m.destination) {
            out.push(PathEndpoints { mv: i });
        }
        let Some(sub) = instance.subnetwork(m.subnetwork) else {
            out.push(UnknownSubnetwork {
                mv: i,
                sub: m.subnetwork,
            });
            continue;
        };
        if let Some(&s) = m.path.iter().find(|&&s| !sub.contains(s)) {
            out.push(OffSubnetwork { mv: i, station: s });
            continue;
        }
        let mut length = 0;
        let mut broken = false;
        for w in m.path.windows(2) {
            match sub.step_length(w[0], w[1]) {
                Some(l) => length += l,
                None => {
                    broken = true;
                    if sub.kind() == SubnetworkKind::Circuit && sub.step_length(w[1], w[0]).is_some() {
                        out.push(Direction {
                            mv: i,
                            from: w[0],
                            to: w[1],
                        });
                    } else {
                        out.push(NotAnEdge {
                            mv: i,
                            from: w[0],
                            to: w[1],
                        });
                    }
                }
            }
        }
        if m.is_stay() {
            if m.arrival < m.departure {
                out.push(StayBackwards { mv: i });
            }
        } else if !broken && m.arrival != m.departure + length {
            out.push(TravelTime {
                mv: i,
                expected: length,
                actual: m.arrival.saturating_sub(m.departure),
            });
        }
    }

    for (i, a) in tour.actions.iter().enumerate() {
        let (before, after) = (&tour.moves[i], &tour.moves[i + 1]);
        if a.vehicle != tour.vehicle {
            out.push(WrongVehicle {
                item: format!("a{}", i + 1),
            });
        }
        if before.destination != a.station || a.station != after.origin {
            out.push(Chain { action: i });
        }
        if before.arrival != a.time {
            out.push(ArrivalMismatch { action: i });
        }
        let ready = a.time + a.duration;
        if after.departure < ready {
            out.push(EarlyDeparture { action: i });
        } else if opts.strict_departures && after.departure != ready {
            out.push(LateDeparture { action: i });
        }
        if i64::from(after.load) != i64::from(before.load) + a.delta {
            out.push(LoadChain { action: i });
        }
        if a.delta.unsigned_abs() > u64::from(cap) {
            out.push(ActionOverload { action: i });
        }
        if a.served.iter().map(|(_, z)| z).sum::<i64>() != a.delta {
            out.push(DeltaMismatch { action: i });
        }
    }

    let (first, last) = (&tour.moves[0], &tour.moves[tour.moves.len() - 1]);
    if first.origin != depot {
        out.push(StartNotAtDepot);
    }
    if last.destination != depot {
        out.push(EndNotAtDepot);
    }
    if first.load != 0 {
        out.push(StartLoaded);
    }
    if last.load != 0 {
        out.push(EndLoaded);
    }
    out
}

/// Validates all tours plus the service map against the instance requests.
pub fn validate_schedule(
    schedule: &Schedule,
    instance: &Instance,
    opts: ValidationOptions,
) -> Vec<Violation> {
    use Violation::*;
    let mut out = Vec::new();
    let k = instance.fleet().vehicles as usize;
    if schedule.tours.len() != k {
        out.push(TourCount {
            expected: k,
            actual: schedule.tours.len(),
        });
    }
    for (i, tour) in schedule.tours.iter().enumerate() {
        if tour.vehicle.0 as usize != i {
            out.push(TourOrder { index: i });
        }
        out.extend(
            validate_tour(tour, instance, opts)
                .into_iter()
                .map(|v| Tour {
                    vehicle: tour.vehicle,
                    violation: Box::new(v),
                }),
        );
    }

    for id in schedule.service.keys() {
        if instance.request(*id).is_none() {
            out.push(UnknownRequest(*id));
        }
    }

    // (request, signed count) -> number of occurrences in actions
    let mut seen: BTreeMap<(RequestId, bool), usize> = BTreeMap::new();
    for tour in &schedule.tours {
        for (ai, a) in tour.actions.iter().enumerate() {
            for &(r, z) in &a.served {
                let Some(ride) = instance.ride(r) else {
                    out.push(UnaccountedService {
                        vehicle: tour.vehicle,
                        action: ai,
                        request: r,
                    });
                    continue;
                };
                *seen.entry((r, z > 0)).or_default() += 1;
                let here = ActionRef {
                    vehicle: tour.vehicle,
                    index: ai,
                };
                let listed = schedule.service.get(&ride.id).is_some_and(|rec| {
                    if z > 0 {
                        rec.pickup == here
                    } else {
                        rec.delivery == here
                    }
                });
                if !listed {
                    out.push(UnaccountedService {
                        vehicle: tour.vehicle,
                        action: ai,
                        request: r,
                    });
                }
            }
        }
    }

    let metric = instance.metric();
    for ride in instance.rides() {
        let Some(rec) = schedule.service.get(&ride.id) else {
            out.push(Unserved(ride.id));
            if let Some(d) = ride.delivery_request {
                out.push(Unserved(d));
            }
            continue;
        };
        if let Some(d) = ride.delivery_request {
            match schedule.service.get(&d) {
                None => out.push(Unserved(d)),
                Some(other) if other != rec => out.push(PairMismatch(d)),
                _ => {}
            }
        }
        let (Some(pick), Some(drop)) = (schedule.action(rec.pickup), schedule.action(rec.delivery))
        else {
            out.push(DanglingRef(ride.id));
            continue;
        };
        if rec.pickup.vehicle != rec.delivery.vehicle {
            out.push(Preemptive(ride.id));
        } else if rec.pickup.index >= rec.delivery.index {
            out.push(DeliveryBeforePickup(ride.id));
        }
        if pick.station != ride.origin {
            out.push(WrongStation {
                request: ride.id,
                pickup: true,
            });
        }
        if drop.station != ride.destination {
            out.push(WrongStation {
                request: ride.id,
                pickup: false,
            });
        }
        let z = i64::from(ride.load);
        if !pick.served.contains(&(ride.id, z)) || seen.get(&(ride.id, true)) != Some(&1) {
            out.push(WrongCount {
                request: ride.id,
                pickup: true,
            });
        }
        if !drop.served.contains(&(ride.id, -z)) || seen.get(&(ride.id, false)) != Some(&1) {
            out.push(WrongCount {
                request: ride.id,
                pickup: false,
            });
        }
        if pick.time < ride.release {
            out.push(BeforeRelease {
                request: ride.id,
                time: pick.time,
                release: ride.release,
            });
        }
        if let (Some(d), true) = (ride.delivery_request, drop.time < ride.destination_from) {
            out.push(BeforeRelease {
                request: d,
                time: drop.time,
                release: ride.destination_from,
            });
        }
        if let Some(req) = instance.request(ride.id) {
            if let (Some(p), Some(q)) = (req.earliest, req.latest) {
                let d = metric.dist(ride.origin, ride.destination);
                if pick.time < p || pick.time + d > q {
                    out.push(PickupOutsideWindow { request: ride.id });
                }
                if drop.time > q {
                    out.push(LateDelivery { request: ride.id });
                }
            }
        }
    }
    out
}

fn same_line_direction(sub: &crate::Subnetwork, a: &[StationId], b: &[StationId]) -> bool {
    let dir = |p: &[StationId]| -> Option<bool> {
        let (i, j) = (sub.position(p[0])?, sub.position(p[1])?);
        Some(j > i)
    };
    a.len() >= 2 && b.len() >= 2 && dir(a).is_some() && dir(a) == dir(b)
}

/// Incremental tour assembly shared by the engine and the oracle.
///
/// Consecutive moves without an action in between are merged when the
/// result is still a valid directed path; actions at the same station and
/// tick are merged into one.
#[derive(Clone, Debug)]
pub struct TourBuilder {
    vehicle: VehicleId,
    depot: StationId,
    home: SubnetworkId,
    station: StationId,
    load: u32,
    moves: Vec<Move>,
    actions: Vec<Action>,
}

impl TourBuilder {
    pub fn new(vehicle: VehicleId, depot: StationId, home: SubnetworkId) -> Self {
        TourBuilder {
            vehicle,
            depot,
            home,
            station: depot,
            load: 0,
            moves: Vec::new(),
            actions: Vec::new(),
        }
    }

    pub fn station(&self) -> StationId {
        self.station
    }

    pub fn load(&self) -> u32 {
        self.load
    }

    fn last_is_move(&self) -> bool {
        !self.moves.is_empty() && self.moves.len() > self.actions.len()
    }

    fn stay(&self, from: Tick, to: Tick) -> Move {
        Move {
            vehicle: self.vehicle,
            origin: self.station,
            departure: from,
            destination: self.station,
            arrival: to,
            path: vec![self.station],
            subnetwork: self.home,
            load: self.load,
        }
    }

    fn null_action(&self, time: Tick) -> Action {
        Action {
            vehicle: self.vehicle,
            station: self.station,
            time,
            delta: 0,
            duration: 0,
            served: Vec::new(),
        }
    }

    /// Records a drive along `path` (first element = current station).
    pub fn travel(
        &mut self,
        sub: &crate::Subnetwork,
        path: Vec<StationId>,
        departure: Tick,
        arrival: Tick,
    ) {
        debug_assert_eq!(path.first(), Some(&self.station));
        if self.last_is_move() {
            let last = self.moves.last_mut().unwrap();
            let mergeable = last.arrival == departure
                && last.subnetwork == sub.id()
                && !last.is_stay()
                && (sub.kind() == SubnetworkKind::Circuit
                    || same_line_direction(sub, &last.path, &path));
            if mergeable {
                last.path.extend_from_slice(&path[1..]);
                last.destination = *path.last().unwrap();
                last.arrival = arrival;
                self.station = last.destination;
                return;
            }
            let t = last.arrival;
            self.actions.push(self.null_action(t));
        }
        self.moves.push(Move {
            vehicle: self.vehicle,
            origin: self.station,
            departure,
            destination: *path.last().unwrap(),
            arrival,
            path: path.clone(),
            subnetwork: sub.id(),
            load: self.load,
        });
        self.station = *path.last().unwrap();
    }

    /// Records boarding/alighting at the current station; returns the action index.
    pub fn act(&mut self, time: Tick, entries: &[(RequestId, i64)]) -> usize {
        if self.moves.is_empty() {
            let m = self.stay(time, time);
            self.moves.push(m);
        } else if self.last_is_move() {
            let arrival = self.moves.last().unwrap().arrival;
            if arrival < time {
                self.actions.push(self.null_action(arrival));
                let m = self.stay(arrival, time);
                self.moves.push(m);
            }
        } else {
            let last = self.actions.last().unwrap();
            if last.time == time && last.station == self.station {
                let idx = self.actions.len() - 1;
                self.merge_into(idx, entries);
                return idx;
            }
            let m = self.stay(last.time + last.duration, time);
            self.moves.push(m);
        }
        let mut action = self.null_action(time);
        action.served = entries.to_vec();
        self.actions.push(action);
        let idx = self.actions.len() - 1;
        self.merge_into(idx, &[]);
        idx
    }

    fn merge_into(&mut self, idx: usize, entries: &[(RequestId, i64)]) {
        let a = &mut self.actions[idx];
        a.served.extend_from_slice(entries);
        a.served.sort_by_key(|&(r, z)| (z > 0, r));
        let before = a.delta;
        a.delta = a.served.iter().map(|(_, z)| z).sum();
        let change = a.delta - before;
        self.load = (i64::from(self.load) + change) as u32;
    }

    /// Closes the tour; the vehicle must be back at the depot.
    pub fn finish(mut self) -> Tour {
        if self.moves.is_empty() {
            return Tour::idle(self.vehicle, self.depot, self.home);
        }
        if !self.last_is_move() {
            let t = self.actions.last().map_or(0, |a| a.time + a.duration);
            let m = self.stay(t, t);
            self.moves.push(m);
        }
        Tour {
            vehicle: self.vehicle,
            moves: self.moves,
            actions: self.actions,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{FleetConfig, Objective, Scenario};
    use crate::network::{Network, Subnetwork};
    use crate::request::Request;

    fn s(i: u32) -> StationId {
        StationId(i)
    }

    fn circuit_instance(requests: Vec<Request>) -> Instance {
        let net = Network::from_edges(1..=4, [(1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 1, 1)], 1).unwrap();
        let c = Subnetwork::new(SubnetworkId(0), SubnetworkKind::Circuit, (1..=4).map(s).collect(), 0, &net)
            .unwrap();
        Instance::new(
            net,
            vec![c],
            FleetConfig::round_robin(1, 3, &[SubnetworkId(0)]),
            requests,
            Scenario::Other,
            Objective::TotalTourLength,
        )
        .unwrap()
    }

    /// One round 1 -> 2 -> 3 -> 4 -> 1 carrying request 0 from 1 to 2.
    fn one_round(inst: &Instance, start: Tick) -> Schedule {
        let sub = &inst.subnetworks()[0];
        let mut b = TourBuilder::new(VehicleId(0), s(1), sub.id());
        let p = b.act(start, &[(RequestId(0), 1)]);
        b.travel(sub, vec![s(1), s(2)], start, start + 1);
        let d = b.act(start + 1, &[(RequestId(0), -1)]);
        b.travel(sub, sub.path(s(2), s(1)).unwrap(), start + 1, start + 4);
        let mut sched = Schedule {
            tours: vec![b.finish()],
            ..Default::default()
        };
        let r = |index| ActionRef {
            vehicle: VehicleId(0),
            index,
        };
        sched.service.insert(
            RequestId(0),
            ServiceRecord {
                pickup: r(p),
                delivery: r(d),
            },
        );
        sched
    }

    #[test]
    fn builder_output_is_valid() {
        let inst = circuit_instance(vec![Request::pdp(0, 2, s(1), s(2), 1)]);
        let sched = one_round(&inst, 2);
        assert_eq!(validate_schedule(&sched, &inst, Default::default()), vec![]);
        assert_eq!(total_length(&sched), 4);
        assert_eq!(makespan(&sched), 6);
    }

    #[test]
    fn early_pickup_is_reported() {
        let inst = circuit_instance(vec![Request::pdp(0, 2, s(1), s(2), 1)]);
        let sched = one_round(&inst, 1);
        let v = validate_schedule(&sched, &inst, Default::default());
        assert!(v.contains(&Violation::BeforeRelease {
            request: RequestId(0),
            time: 1,
            release: 2
        }));
    }

    #[test]
    fn omitted_request_is_unserved() {
        let inst = circuit_instance(vec![
            Request::pdp(0, 0, s(1), s(2), 1),
            Request::pdp(1, 0, s(2), s(3), 1),
        ]);
        let sched = one_round(&inst, 0);
        let v = validate_schedule(&sched, &inst, Default::default());
        assert_eq!(v, vec![Violation::Unserved(RequestId(1))]);
        assert_eq!(v[0].to_string(), "unserved request 1");
    }

    #[test]
    fn departure_before_action_completes() {
        let inst = circuit_instance(vec![Request::pdp(0, 0, s(1), s(2), 1)]);
        let mut sched = one_round(&inst, 0);
        let tour = &mut sched.tours[0];
        tour.actions[0].duration = 2;
        let v = validate_tour(tour, &inst, Default::default());
        assert!(v.contains(&Violation::EarlyDeparture { action: 0 }));
        assert!(v.iter().any(|x| x.to_string() == "dep(m2) < t(a1)+dur(a1)"));
    }

    #[test]
    fn reverse_circuit_move_is_a_direction_violation() {
        let inst = circuit_instance(vec![]);
        let tour = Tour {
            vehicle: VehicleId(0),
            moves: vec![
                Move {
                    vehicle: VehicleId(0),
                    origin: s(1),
                    departure: 0,
                    destination: s(4),
                    arrival: 1,
                    path: vec![s(1), s(4)],
                    subnetwork: SubnetworkId(0),
                    load: 0,
                },
                Move {
                    vehicle: VehicleId(0),
                    origin: s(4),
                    departure: 1,
                    destination: s(1),
                    arrival: 2,
                    path: vec![s(4), s(1)],
                    subnetwork: SubnetworkId(0),
                    load: 0,
                },
            ],
            actions: vec![Action {
                vehicle: VehicleId(0),
                station: s(4),
                time: 1,
                delta: 0,
                duration: 0,
                served: vec![],
            }],
        };
        let v = validate_tour(&tour, &inst, Default::default());
        assert_eq!(
            v,
            vec![Violation::Direction {
                mv: 0,
                from: s(1),
                to: s(4)
            }]
        );
    }

    #[test]
    fn strict_mode_flags_waiting_gaps() {
        let inst = circuit_instance(vec![Request::pdp(0, 0, s(1), s(2), 1)]);
        let mut sched = one_round(&inst, 0);
        // wait one tick at station 2 before heading home
        let tour = &mut sched.tours[0];
        tour.moves[2].departure += 1;
        tour.moves[2].arrival += 1;
        assert!(validate_tour(tour, &inst, Default::default()).is_empty());
        let strict = ValidationOptions {
            strict_departures: true,
        };
        assert_eq!(
            validate_tour(tour, &inst, strict),
            vec![Violation::LateDeparture { action: 1 }]
        );
    }

    #[test]
    fn empty_schedule_costs_nothing() {
        let inst = circuit_instance(vec![]);
        let sched = Schedule {
            tours: vec![Tour::idle(VehicleId(0), s(1), SubnetworkId(0))],
            ..Default::default()
        };
        assert!(validate_schedule(&sched, &inst, Default::default()).is_empty());
        assert_eq!(total_length(&sched), 0);
        assert_eq!(makespan(&sched), 0);
    }

    #[test]
    fn builder_merges_same_tick_actions_deliveries_first() {
        let inst = circuit_instance(vec![]);
        let sub = &inst.subnetworks()[0];
        let mut b = TourBuilder::new(VehicleId(0), s(1), sub.id());
        b.act(0, &[(RequestId(5), 1)]);
        b.travel(sub, vec![s(1), s(2)], 0, 1);
        let i = b.act(1, &[(RequestId(7), 1)]);
        let j = b.act(1, &[(RequestId(5), -1)]);
        assert_eq!(i, j);
        b.travel(sub, vec![s(2), s(3)], 1, 2);
        b.travel(sub, vec![s(3), s(4), s(1)], 2, 4);
        let tour = b.finish();
        assert_eq!(tour.actions[1].served, vec![(RequestId(5), -1), (RequestId(7), 1)]);
        assert_eq!(tour.actions[1].delta, 0);
        // the two trailing drives collapse into one move
        assert_eq!(tour.moves.len(), 3);
        assert_eq!(tour.moves[2].path, vec![s(2), s(3), s(4), s(1)]);
    }
}
