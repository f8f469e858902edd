//! Event-driven online simulation.
//!
//! Requests become visible only at their release tick. Each vehicle is
//! driven by its own [`Policy`], queried at decision epochs: when it finishes
//! a drive or a wait, when a request assigned to it is released while it is
//! idle, and when the end of the sequence is announced (one tick after the
//! last release). Moving vehicles are never interrupted mid-drive.
//!
//! Every state change goes through [`World::apply`] and is logged in the
//! [`Trace`], so [`replay`] rebuilds the schedule by re-applying the log.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::algorithms::PolicyError;
use crate::instance::{Instance, VehicleId};
use crate::network::{StationId, Subnetwork, SubnetworkId};
use crate::request::{RequestId, RequestKind};
use crate::schedule::{
    validate_schedule, ActionRef, Schedule, ServiceRecord, TourBuilder, ValidationOptions, Violation,
};
use crate::Tick;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PolicyCommand {
    /// Idle until the given tick, or until an event wakes the vehicle earlier.
    WaitUntil(Tick),
    /// Idle until a release, a revealed destination or the end-of-sequence announcement.
    WaitForEvent,
    MoveTo { target: StationId, via: SubnetworkId },
    PickUp(Vec<RequestId>),
    DropOff(Vec<RequestId>),
    ReturnToDepot,
}

/// What a policy may know about a ride.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RideView {
    pub id: RequestId,
    pub kind: RequestKind,
    pub origin: StationId,
    /// `None` until the paired delivery request is released.
    pub destination: Option<StationId>,
    pub load: u32,
    pub release: Tick,
    pub pickup_from: Tick,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VehicleStatus {
    pub vehicle: VehicleId,
    pub station: StationId,
    pub subnetwork: SubnetworkId,
    pub onboard: Vec<RequestId>,
    /// Destination and arrival tick while driving.
    pub driving: Option<(StationId, Tick)>,
}

/// The non-clairvoyant snapshot handed to a policy.
#[derive(Clone, Debug)]
pub struct WorldView<'a> {
    pub now: Tick,
    pub vehicle: VehicleId,
    pub station: StationId,
    pub subnetwork: &'a Subnetwork,
    pub depot: StationId,
    pub capacity: u32,
    pub load: u32,
    pub onboard: Vec<RideView>,
    /// Released, not yet picked up, assigned to this vehicle; release order.
    pub waiting: Vec<RideView>,
    pub fleet: Vec<VehicleStatus>,
    pub end_of_sequence: bool,
}

/// A per-vehicle online decision maker.
pub trait Policy {
    fn decide(&mut self, view: &WorldView<'_>) -> Result<PolicyCommand, PolicyError>;
}

/// Builds one policy per vehicle.
pub trait PolicyFactory {
    fn build(&self, vehicle: VehicleId, instance: &Instance) -> Result<Box<dyn Policy>, PolicyError>;
}

impl<F> PolicyFactory for F
where
    F: Fn(VehicleId, &Instance) -> Result<Box<dyn Policy>, PolicyError>,
{
    fn build(&self, vehicle: VehicleId, instance: &Instance) -> Result<Box<dyn Policy>, PolicyError> {
        self(vehicle, instance)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TraceEvent {
    Released { request: RequestId },
    EndOfSequence,
    Query { vehicle: VehicleId, visible: Vec<RequestId> },
    Departed {
        vehicle: VehicleId,
        from: StationId,
        path: Vec<StationId>,
        arrive: Tick,
    },
    Arrived { vehicle: VehicleId, station: StationId },
    Picked {
        vehicle: VehicleId,
        station: StationId,
        requests: Vec<RequestId>,
    },
    Dropped {
        vehicle: VehicleId,
        station: StationId,
        requests: Vec<RequestId>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRecord {
    pub tick: Tick,
    pub event: TraceEvent,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    if items.is_empty() {
        return "-".into();
    }
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl Trace {
    /// Line-oriented `tick event vehicle station payload` dump.
    pub fn dump(&self, instance: &Instance) -> String {
        let mut out = String::new();
        for r in &self.records {
            let line = match &r.event {
                TraceEvent::Released { request } => {
                    let at = instance
                        .request(*request)
                        .and_then(|q| q.origin.or(q.destination))
                        .map_or("-".to_string(), |s| s.to_string());
                    format!("released - {at} request={request}")
                }
                TraceEvent::EndOfSequence => "end_of_sequence - - -".to_string(),
                TraceEvent::Query { vehicle, visible } => {
                    format!("query {vehicle} - visible={}", join(visible))
                }
                TraceEvent::Departed {
                    vehicle,
                    from,
                    path,
                    arrive,
                } => format!("departed {vehicle} {from} path={} arrive={arrive}", join(path)),
                TraceEvent::Arrived { vehicle, station } => format!("arrived {vehicle} {station} -"),
                TraceEvent::Picked {
                    vehicle,
                    station,
                    requests,
                } => format!("picked {vehicle} {station} requests={}", join(requests)),
                TraceEvent::Dropped {
                    vehicle,
                    station,
                    requests,
                } => format!("dropped {vehicle} {station} requests={}", join(requests)),
            };
            let _ = writeln!(out, "{} {}", r.tick, line);
        }
        out
    }

    /// Inverse of [`Trace::dump`].
    pub fn parse(text: &str) -> Result<Trace, String> {
        fn num<T: std::str::FromStr>(s: &str) -> Result<T, String> {
            s.parse().map_err(|_| format!("bad number {s:?}"))
        }
        fn list(s: &str) -> Result<Vec<u32>, String> {
            if s == "-" {
                return Ok(Vec::new());
            }
            s.split(',').map(num).collect()
        }
        fn field<'a>(payload: &'a str, key: &str) -> Result<&'a str, String> {
            payload
                .split_whitespace()
                .find_map(|kv| kv.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
                .ok_or_else(|| format!("missing {key}="))
        }
        let mut records = Vec::new();
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let err = |e: String| format!("line {}: {e}", n + 1);
            let parts: Vec<&str> = line.splitn(5, ' ').collect();
            if parts.len() < 5 {
                return Err(err("expected five fields".into()));
            }
            let tick: Tick = num(parts[0]).map_err(err)?;
            let vehicle = || num::<u32>(parts[2]).map(VehicleId).map_err(err);
            let station = || num::<u32>(parts[3]).map(StationId).map_err(err);
            let payload = parts[4];
            let requests = |key| -> Result<Vec<RequestId>, String> {
                Ok(list(field(payload, key).map_err(err)?)
                    .map_err(err)?
                    .into_iter()
                    .map(RequestId)
                    .collect())
            };
            let event = match parts[1] {
                "released" => TraceEvent::Released {
                    request: RequestId(num(field(payload, "request").map_err(err)?).map_err(err)?),
                },
                "end_of_sequence" => TraceEvent::EndOfSequence,
                "query" => TraceEvent::Query {
                    vehicle: vehicle()?,
                    visible: requests("visible")?,
                },
                "departed" => TraceEvent::Departed {
                    vehicle: vehicle()?,
                    from: station()?,
                    path: list(field(payload, "path").map_err(err)?)
                        .map_err(err)?
                        .into_iter()
                        .map(StationId)
                        .collect(),
                    arrive: num(field(payload, "arrive").map_err(err)?).map_err(err)?,
                },
                "arrived" => TraceEvent::Arrived {
                    vehicle: vehicle()?,
                    station: station()?,
                },
                "picked" => TraceEvent::Picked {
                    vehicle: vehicle()?,
                    station: station()?,
                    requests: requests("requests")?,
                },
                "dropped" => TraceEvent::Dropped {
                    vehicle: vehicle()?,
                    station: station()?,
                    requests: requests("requests")?,
                },
                other => return Err(err(format!("unknown event {other:?}"))),
            };
            records.push(TraceRecord { tick, event });
        }
        Ok(Trace { records })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("policy stuck at tick {tick}: {reason}")]
    PolicyStuck { tick: Tick, reason: String },
    #[error("illegal command from vehicle {vehicle} at tick {tick}: {reason}")]
    IllegalCommand {
        vehicle: VehicleId,
        tick: Tick,
        reason: String,
    },
    #[error("vehicle {vehicle}: {error}")]
    Policy { vehicle: VehicleId, error: PolicyError },
    #[error("trace does not match the instance: {0}")]
    TraceMismatch(String),
    #[error("simulated schedule is invalid: {0:?}")]
    InvalidSchedule(Vec<Violation>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RideStatus {
    Unreleased,
    Waiting,
    Onboard(VehicleId),
    Delivered,
}

#[derive(Clone, Debug)]
struct RideState {
    status: RideStatus,
    destination_known: bool,
    assigned: VehicleId,
    pickup: Option<ActionRef>,
    delivery: Option<ActionRef>,
}

#[derive(Clone, Debug)]
struct VehicleState {
    station: StationId,
    driving: Option<(StationId, Tick)>,
    onboard: Vec<usize>,
    load: u32,
    builder: TourBuilder,
}

/// Mutable simulation state; only changed through [`World::apply`].
#[derive(Clone, Debug)]
pub struct World<'a> {
    instance: &'a Instance,
    now: Tick,
    eos_tick: Tick,
    eos: bool,
    rides: Vec<RideState>,
    ride_index: BTreeMap<RequestId, usize>,
    delivery_index: BTreeMap<RequestId, usize>,
    vehicles: Vec<VehicleState>,
    trace: Trace,
}

impl<'a> World<'a> {
    pub fn new(instance: &'a Instance) -> Self {
        let depot = instance.depot();
        let rides = instance
            .rides()
            .iter()
            .map(|r| RideState {
                status: RideStatus::Unreleased,
                destination_known: false,
                assigned: instance.vehicle_for(r).expect("validated at construction"),
                pickup: None,
                delivery: None,
            })
            .collect();
        let ride_index = instance
            .rides()
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id, i))
            .collect();
        let delivery_index = instance
            .rides()
            .iter()
            .enumerate()
            .filter_map(|(i, r)| r.delivery_request.map(|d| (d, i)))
            .collect();
        let vehicles = instance
            .vehicles()
            .map(|v| VehicleState {
                station: depot,
                driving: None,
                onboard: Vec::new(),
                load: 0,
                builder: TourBuilder::new(v, depot, instance.vehicle_subnetwork(v).id()),
            })
            .collect();
        World {
            instance,
            now: 0,
            eos_tick: end_of_sequence_tick(instance),
            eos: false,
            rides,
            ride_index,
            delivery_index,
            vehicles,
            trace: Trace::default(),
        }
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    fn vehicle(&self, v: VehicleId) -> Result<&VehicleState, String> {
        self.vehicles
            .get(v.0 as usize)
            .ok_or_else(|| format!("unknown vehicle {v}"))
    }

    fn ride_view(&self, i: usize) -> RideView {
        let r = &self.instance.rides()[i];
        let known = self.rides[i].destination_known;
        RideView {
            id: r.id,
            kind: r.kind,
            origin: r.origin,
            destination: known.then_some(r.destination),
            load: r.load,
            release: r.release,
            pickup_from: r.pickup_from,
        }
    }

    /// Ids of rides a vehicle can currently see, in release order.
    fn visible(&self, v: VehicleId) -> (Vec<usize>, Vec<usize>) {
        let waiting = (0..self.rides.len())
            .filter(|&i| self.rides[i].status == RideStatus::Waiting && self.rides[i].assigned == v)
            .collect();
        let onboard = self.vehicles[v.0 as usize].onboard.clone();
        (waiting, onboard)
    }

    pub fn view(&self, v: VehicleId) -> WorldView<'a> {
        let (waiting, onboard) = self.visible(v);
        let st = &self.vehicles[v.0 as usize];
        WorldView {
            now: self.now,
            vehicle: v,
            station: st.station,
            subnetwork: self.instance.vehicle_subnetwork(v),
            depot: self.instance.depot(),
            capacity: self.instance.capacity(),
            load: st.load,
            onboard: onboard.iter().map(|&i| self.ride_view(i)).collect(),
            waiting: waiting.iter().map(|&i| self.ride_view(i)).collect(),
            fleet: self
                .instance
                .vehicles()
                .map(|u| {
                    let s = &self.vehicles[u.0 as usize];
                    VehicleStatus {
                        vehicle: u,
                        station: s.station,
                        subnetwork: self.instance.vehicle_subnetwork(u).id(),
                        onboard: s
                            .onboard
                            .iter()
                            .map(|&i| self.instance.rides()[i].id)
                            .collect(),
                        driving: s.driving,
                    }
                })
                .collect(),
            end_of_sequence: self.eos,
        }
    }

    /// Validates and applies one event at `tick`, appending it to the trace.
    pub fn apply(&mut self, tick: Tick, event: TraceEvent) -> Result<(), String> {
        if tick < self.now {
            return Err(format!("tick {tick} goes back in time (now {})", self.now));
        }
        self.now = tick;
        let inst = self.instance;
        match &event {
            TraceEvent::Released { request } => {
                let req = inst
                    .request(*request)
                    .ok_or_else(|| format!("unknown request {request}"))?;
                if req.release != tick {
                    return Err(format!("request {request} is released at {}", req.release));
                }
                if let Some(&i) = self.ride_index.get(request) {
                    if self.rides[i].status != RideStatus::Unreleased {
                        return Err(format!("request {request} released twice"));
                    }
                    self.rides[i].status = RideStatus::Waiting;
                    if inst.rides()[i].delivery_request.is_none() {
                        self.rides[i].destination_known = true;
                    }
                } else if let Some(&i) = self.delivery_index.get(request) {
                    if self.rides[i].destination_known {
                        return Err(format!("request {request} released twice"));
                    }
                    self.rides[i].destination_known = true;
                }
            }
            TraceEvent::EndOfSequence => {
                if tick != self.eos_tick || self.eos {
                    return Err(format!("end of sequence announced at {tick}"));
                }
                self.eos = true;
            }
            TraceEvent::Query { vehicle, visible } => {
                self.vehicle(*vehicle)?;
                let (waiting, onboard) = self.visible(*vehicle);
                let expected: Vec<RequestId> = waiting
                    .iter()
                    .chain(&onboard)
                    .map(|&i| inst.rides()[i].id)
                    .collect();
                if *visible != expected {
                    return Err(format!("vehicle {vehicle} saw {visible:?}, expected {expected:?}"));
                }
                for id in visible {
                    if inst.request(*id).is_none_or(|r| r.release > tick) {
                        return Err(format!("request {id} visible before its release"));
                    }
                }
            }
            TraceEvent::Departed {
                vehicle,
                from,
                path,
                arrive,
            } => {
                let st = self.vehicle(*vehicle)?;
                if st.driving.is_some() || st.station != *from {
                    return Err(format!("vehicle {vehicle} is not standing at {from}"));
                }
                let sub = inst.vehicle_subnetwork(*vehicle);
                let to = *path.last().ok_or("empty path")?;
                let expected = sub.path(*from, to).map_err(|e| e.to_string())?;
                let len = sub.travel(*from, to).map_err(|e| e.to_string())?;
                if *path != expected || to == *from {
                    return Err(format!("path {path:?} is not the route {from}->{to}"));
                }
                if *arrive != tick + len {
                    return Err(format!("arrival {arrive} != {tick} + {len}"));
                }
                let st = &mut self.vehicles[vehicle.0 as usize];
                st.builder.travel(sub, path.clone(), tick, *arrive);
                st.driving = Some((to, *arrive));
            }
            TraceEvent::Arrived { vehicle, station } => {
                let st = self.vehicle(*vehicle)?;
                if st.driving != Some((*station, tick)) {
                    return Err(format!("vehicle {vehicle} does not arrive at {station} now"));
                }
                let st = &mut self.vehicles[vehicle.0 as usize];
                st.driving = None;
                st.station = *station;
            }
            TraceEvent::Picked {
                vehicle,
                station,
                requests,
            } => {
                let st = self.vehicle(*vehicle)?;
                if st.driving.is_some() || st.station != *station {
                    return Err(format!("vehicle {vehicle} is not standing at {station}"));
                }
                let mut load = st.load;
                let mut idx = Vec::new();
                for id in requests {
                    let &i = self
                        .ride_index
                        .get(id)
                        .ok_or_else(|| format!("{id} is not a pickup-side request"))?;
                    let (ride, state) = (&inst.rides()[i], &self.rides[i]);
                    if state.status != RideStatus::Waiting || state.assigned != *vehicle {
                        return Err(format!("request {id} is not waiting for vehicle {vehicle}"));
                    }
                    if ride.origin != *station || tick < ride.pickup_from || idx.contains(&i) {
                        return Err(format!("request {id} cannot be picked up here and now"));
                    }
                    load += ride.load;
                    idx.push(i);
                }
                if load > inst.capacity() || requests.is_empty() {
                    return Err(format!("pickup of {requests:?} exceeds capacity or is empty"));
                }
                let entries: Vec<(RequestId, i64)> = idx
                    .iter()
                    .map(|&i| (inst.rides()[i].id, i64::from(inst.rides()[i].load)))
                    .collect();
                let st = &mut self.vehicles[vehicle.0 as usize];
                let a = st.builder.act(tick, &entries);
                st.load = load;
                st.onboard.extend(&idx);
                for i in idx {
                    self.rides[i].status = RideStatus::Onboard(*vehicle);
                    self.rides[i].pickup = Some(ActionRef {
                        vehicle: *vehicle,
                        index: a,
                    });
                }
            }
            TraceEvent::Dropped {
                vehicle,
                station,
                requests,
            } => {
                let st = self.vehicle(*vehicle)?;
                if st.driving.is_some() || st.station != *station {
                    return Err(format!("vehicle {vehicle} is not standing at {station}"));
                }
                let mut idx = Vec::new();
                for id in requests {
                    let &i = self
                        .ride_index
                        .get(id)
                        .ok_or_else(|| format!("{id} is not a pickup-side request"))?;
                    let (ride, state) = (&inst.rides()[i], &self.rides[i]);
                    if state.status != RideStatus::Onboard(*vehicle)
                        || !state.destination_known
                        || ride.destination != *station
                        || idx.contains(&i)
                    {
                        return Err(format!("request {id} cannot be dropped here and now"));
                    }
                    idx.push(i);
                }
                if idx.is_empty() {
                    return Err("empty drop-off".into());
                }
                let entries: Vec<(RequestId, i64)> = idx
                    .iter()
                    .map(|&i| (inst.rides()[i].id, -i64::from(inst.rides()[i].load)))
                    .collect();
                let st = &mut self.vehicles[vehicle.0 as usize];
                let a = st.builder.act(tick, &entries);
                for &i in &idx {
                    st.load -= inst.rides()[i].load;
                    st.onboard.retain(|&j| j != i);
                    self.rides[i].status = RideStatus::Delivered;
                    self.rides[i].delivery = Some(ActionRef {
                        vehicle: *vehicle,
                        index: a,
                    });
                }
            }
        }
        self.trace.records.push(TraceRecord { tick, event });
        Ok(())
    }

    fn all_delivered(&self) -> bool {
        self.rides.iter().all(|r| r.status == RideStatus::Delivered)
    }

    /// Closes all tours; fails unless every ride is delivered and every vehicle is home.
    pub fn into_schedule(self) -> Result<(Schedule, Trace), String> {
        if !self.all_delivered() {
            return Err("not every request was served".into());
        }
        let depot = self.instance.depot();
        let mut service = BTreeMap::new();
        for (ride, state) in self.instance.rides().iter().zip(&self.rides) {
            let rec = ServiceRecord {
                pickup: state.pickup.unwrap(),
                delivery: state.delivery.unwrap(),
            };
            service.insert(ride.id, rec);
            if let Some(d) = ride.delivery_request {
                service.insert(d, rec);
            }
        }
        let mut tours = Vec::new();
        for (j, v) in self.vehicles.into_iter().enumerate() {
            if v.driving.is_some() || v.station != depot {
                return Err(format!("vehicle {j} did not return to the depot"));
            }
            tours.push(v.builder.finish());
        }
        Ok((Schedule { tours, service }, self.trace))
    }
}

/// One tick after the last release; tick 0 for an empty sequence.
pub fn end_of_sequence_tick(instance: &Instance) -> Tick {
    instance.last_release().map_or(0, |t| t + 1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Wake {
    Now,
    At(Tick),
    OnEvent,
    Driving,
}

/// Schedule and event log of one simulated run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub schedule: Schedule,
    pub trace: Trace,
}

const MAX_QUERIES_PER_TICK: usize = 10_000;

/// Simulates the policies online against the instance.
pub fn run_online(instance: &Instance, factory: &dyn PolicyFactory) -> Result<Outcome, EngineError> {
    let mut policies = instance
        .vehicles()
        .map(|v| {
            factory
                .build(v, instance)
                .map_err(|error| EngineError::Policy { vehicle: v, error })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut world = World::new(instance);
    let mut wake = vec![Wake::Now; policies.len()];
    let requests = instance.requests();
    let mut next_req = 0;
    let eos_tick = world.eos_tick;
    let horizon_guard = eos_tick
        + 10_000
            * (1 + instance.subnetworks().iter().map(|s| s.length()).sum::<Tick>())
            * (1 + requests.len() as Tick);
    let mut now: Tick = 0;

    loop {
        let stuck = |reason: &str| EngineError::PolicyStuck {
            tick: now,
            reason: reason.to_string(),
        };
        while next_req < requests.len() && requests[next_req].release == now {
            let id = requests[next_req].id;
            world
                .apply(now, TraceEvent::Released { request: id })
                .map_err(EngineError::TraceMismatch)?;
            let owner = world
                .ride_index
                .get(&id)
                .or_else(|| world.delivery_index.get(&id))
                .map(|&i| match world.rides[i].status {
                    RideStatus::Onboard(v) => v,
                    _ => world.rides[i].assigned,
                });
            if let Some(v) = owner {
                let w = &mut wake[v.0 as usize];
                if matches!(w, Wake::At(_) | Wake::OnEvent) {
                    *w = Wake::Now;
                }
            }
            next_req += 1;
        }
        if now == eos_tick && !world.eos {
            world
                .apply(now, TraceEvent::EndOfSequence)
                .map_err(EngineError::TraceMismatch)?;
            for w in wake.iter_mut() {
                if matches!(w, Wake::At(_) | Wake::OnEvent) {
                    *w = Wake::Now;
                }
            }
        }
        for (j, w) in wake.iter_mut().enumerate() {
            let v = VehicleId(j as u32);
            if let Some((station, at)) = world.vehicles[j].driving {
                if at == now {
                    world
                        .apply(now, TraceEvent::Arrived { vehicle: v, station })
                        .map_err(EngineError::TraceMismatch)?;
                    *w = Wake::Now;
                }
            }
            if matches!(*w, Wake::At(t) if t <= now) {
                *w = Wake::Now;
            }
        }

        for j in 0..policies.len() {
            let v = VehicleId(j as u32);
            let mut queries = 0;
            while wake[j] == Wake::Now {
                queries += 1;
                if queries > MAX_QUERIES_PER_TICK {
                    return Err(stuck("too many decisions without time passing"));
                }
                let view = world.view(v);
                let visible = view
                    .waiting
                    .iter()
                    .chain(&view.onboard)
                    .map(|r| r.id)
                    .collect();
                world
                    .apply(now, TraceEvent::Query { vehicle: v, visible })
                    .map_err(EngineError::TraceMismatch)?;
                let cmd = policies[j]
                    .decide(&view)
                    .map_err(|error| EngineError::Policy { vehicle: v, error })?;
                let illegal = |reason: String| EngineError::IllegalCommand {
                    vehicle: v,
                    tick: now,
                    reason,
                };
                let sub = instance.vehicle_subnetwork(v);
                let station = world.vehicles[j].station;
                match cmd {
                    PolicyCommand::PickUp(ids) => world
                        .apply(
                            now,
                            TraceEvent::Picked {
                                vehicle: v,
                                station,
                                requests: ids,
                            },
                        )
                        .map_err(illegal)?,
                    PolicyCommand::DropOff(ids) => world
                        .apply(
                            now,
                            TraceEvent::Dropped {
                                vehicle: v,
                                station,
                                requests: ids,
                            },
                        )
                        .map_err(illegal)?,
                    PolicyCommand::MoveTo { target, via } => {
                        if via != sub.id() {
                            return Err(illegal(format!("vehicle is bound to subnetwork {}", sub.id())));
                        }
                        depart(&mut world, now, v, sub, station, target).map_err(illegal)?;
                        wake[j] = Wake::Driving;
                    }
                    PolicyCommand::ReturnToDepot => {
                        depart(&mut world, now, v, sub, station, instance.depot()).map_err(illegal)?;
                        wake[j] = Wake::Driving;
                    }
                    PolicyCommand::WaitUntil(t) if t > now => wake[j] = Wake::At(t),
                    PolicyCommand::WaitUntil(t) => {
                        return Err(illegal(format!("cannot wait until past tick {t}")))
                    }
                    PolicyCommand::WaitForEvent => wake[j] = Wake::OnEvent,
                }
            }
        }

        let home = world
            .vehicles
            .iter()
            .all(|s| s.driving.is_none() && s.station == instance.depot());
        if world.eos && world.all_delivered() && home && wake.iter().all(|w| *w == Wake::OnEvent) {
            break;
        }

        let mut next: Option<Tick> = None;
        let mut consider = |t: Tick| next = Some(next.map_or(t, |n: Tick| n.min(t)));
        if let Some(r) = requests.get(next_req) {
            consider(r.release);
        }
        if !world.eos {
            consider(eos_tick);
        }
        for (j, w) in wake.iter().enumerate() {
            match w {
                Wake::At(t) => consider(*t),
                Wake::Driving => consider(world.vehicles[j].driving.unwrap().1),
                _ => {}
            }
        }
        match next {
            Some(t) if t <= horizon_guard => now = t,
            Some(_) => return Err(stuck("simulation ran past its horizon")),
            None if !world.all_delivered() => {
                return Err(stuck("every vehicle waits for an event but none is coming"))
            }
            None => return Err(stuck("a vehicle stopped away from the depot")),
        }
    }

    let (schedule, trace) = world.into_schedule().map_err(|r| EngineError::PolicyStuck {
        tick: now,
        reason: r,
    })?;
    let violations = validate_schedule(&schedule, instance, ValidationOptions::default());
    if !violations.is_empty() {
        return Err(EngineError::InvalidSchedule(violations));
    }
    Ok(Outcome { schedule, trace })
}

fn depart(
    world: &mut World<'_>,
    now: Tick,
    v: VehicleId,
    sub: &Subnetwork,
    from: StationId,
    target: StationId,
) -> Result<(), String> {
    if target == from {
        return Err(format!("already at {target}"));
    }
    let path = sub.path(from, target).map_err(|e| e.to_string())?;
    let len = sub.travel(from, target).map_err(|e| e.to_string())?;
    world.apply(
        now,
        TraceEvent::Departed {
            vehicle: v,
            from,
            path,
            arrive: now + len,
        },
    )
}

/// Rebuilds the schedule from a trace, rejecting any inconsistent record.
pub fn replay(trace: &Trace, instance: &Instance) -> Result<Schedule, EngineError> {
    let mut world = World::new(instance);
    for r in &trace.records {
        world
            .apply(r.tick, r.event.clone())
            .map_err(EngineError::TraceMismatch)?;
    }
    if world.trace != *trace {
        return Err(EngineError::TraceMismatch("trace was not reproduced".into()));
    }
    let released = trace
        .records
        .iter()
        .filter(|r| matches!(r.event, TraceEvent::Released { .. }))
        .count();
    if released != instance.requests().len() {
        return Err(EngineError::TraceMismatch(format!(
            "{released} of {} requests released",
            instance.requests().len()
        )));
    }
    world
        .into_schedule()
        .map(|(s, _)| s)
        .map_err(EngineError::TraceMismatch)
}

/// Checks that no query saw a request before its release.
pub fn audit_non_clairvoyance(trace: &Trace, instance: &Instance) -> Result<(), String> {
    let mut last = 0;
    for r in &trace.records {
        if r.tick < last {
            return Err(format!("trace goes back in time at tick {}", r.tick));
        }
        last = r.tick;
        if let TraceEvent::Query { visible, .. } = &r.event {
            for id in visible {
                match instance.request(*id) {
                    Some(req) if req.release <= r.tick => {}
                    _ => return Err(format!("request {id} visible at tick {} before release", r.tick)),
                }
            }
        }
    }
    Ok(())
}
