//! Exact clairvoyant optimum for small instances.
//!
//! One vehicle is solved by best-first search over labels
//! `(station, pending set, onboard set)` carrying `(tick, length)`; a label is
//! discarded when another label with the same key is no later and no longer.
//! From a label the vehicle either boards a capacity-feasible set of rides at
//! its station (now, or after waiting there until one of them becomes ready),
//! drives at once to a station where something remains to be done, or waits
//! until an onboard passenger may leave at its station. Driving off later is
//! never needed: it reaches the same key at a later tick.
//! Arriving vehicles drop every passenger that may leave there.
//!
//! Two vehicles are solved by enumerating the split of rides between them.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap};

use num_rational::Ratio;
use thiserror::Error;

use crate::engine::{run_online, EngineError, PolicyFactory};
use crate::instance::{Instance, Objective, Ride, VehicleId};
use crate::network::{StationId, Subnetwork};
use crate::request::RequestId;
use crate::schedule::{cost, ActionRef, Schedule, ServiceRecord, Tour, TourBuilder};
use crate::Tick;

pub const MAX_REQUESTS: usize = 12;
pub const MAX_STATIONS: usize = 8;
pub const MAX_VEHICLES: u32 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance too large for the exact oracle: {0}")]
    InstanceTooLarge(String),
    #[error("no feasible schedule meets every time window")]
    Infeasible,
    #[error("optimum is zero (online cost {alg})")]
    ZeroOptimum { alg: Tick },
    #[error(transparent)]
    Simulation(#[from] EngineError),
}

#[derive(Clone, Debug)]
pub struct OptResult {
    pub cost: Tick,
    pub schedule: Schedule,
    pub explored: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Key {
    station: usize,
    pending: u16,
    onboard: u16,
}

#[derive(Clone, Debug)]
struct Label {
    key: Key,
    tick: Tick,
    len: Tick,
    parent: Option<usize>,
    picked: u16,
    pick_time: Tick,
    drive: Option<(Vec<StationId>, Tick, Tick)>,
    dropped: u16,
}

struct Search<'a> {
    sub: &'a Subnetwork,
    rides: Vec<&'a Ride>,
    capacity: u32,
    objective: Objective,
    depot: usize,
    dist: Vec<Vec<Tick>>,
    origin: Vec<usize>,
    dest: Vec<usize>,
}

fn bits(mask: u16) -> impl Iterator<Item = usize> {
    (0..16).filter(move |i| mask & (1 << i) != 0)
}

impl<'a> Search<'a> {
    fn new(instance: &'a Instance, sub: &'a Subnetwork, rides: Vec<&'a Ride>, objective: Objective) -> Self {
        let st = sub.stations();
        let idx = |s: StationId| sub.position(s).expect("ride lies on the subnetwork");
        let dist = st
            .iter()
            .map(|&u| st.iter().map(|&v| sub.travel(u, v).unwrap()).collect())
            .collect();
        Search {
            sub,
            capacity: instance.capacity(),
            objective,
            depot: idx(instance.depot()),
            dist,
            origin: rides.iter().map(|r| idx(r.origin)).collect(),
            dest: rides.iter().map(|r| idx(r.destination)).collect(),
            rides,
        }
    }

    fn load(&self, mask: u16) -> u32 {
        bits(mask).map(|i| self.rides[i].load).sum()
    }

    /// Drops everyone who may leave at `station` at `tick`.
    fn drops(&self, station: usize, tick: Tick, onboard: u16) -> u16 {
        bits(onboard)
            .filter(|&i| self.dest[i] == station && self.rides[i].destination_from <= tick)
            .fold(0, |m, i| m | 1 << i)
    }

    /// Lower bound on the final cost, or `None` if a deadline is already lost.
    fn bound(&self, key: Key, tick: Tick, len: Tick) -> Option<Tick> {
        let d = &self.dist;
        let s = key.station;
        let mut extra = d[s][self.depot];
        let mut finish = tick + d[s][self.depot];
        for i in bits(key.pending) {
            let r = self.rides[i];
            let (x, y) = (self.origin[i], self.dest[i]);
            let pick = (tick + d[s][x]).max(r.pickup_from);
            if r.latest_pickup.is_some_and(|l| pick > l) {
                return None;
            }
            let drop = (pick + d[x][y]).max(r.destination_from);
            extra = extra.max(d[s][x] + d[x][y] + d[y][self.depot]);
            finish = finish.max(drop + d[y][self.depot]);
        }
        for i in bits(key.onboard) {
            let r = self.rides[i];
            let y = self.dest[i];
            let arrive = tick + d[s][y];
            if r.deadline.is_some_and(|q| arrive > q) {
                return None;
            }
            extra = extra.max(d[s][y] + d[y][self.depot]);
            finish = finish.max(arrive.max(r.destination_from) + d[y][self.depot]);
        }
        Some(match self.objective {
            Objective::TotalTourLength => len + extra,
            Objective::Makespan => finish,
        })
    }

    /// Nonempty boarding sets available now or after waiting here for
    /// further rides to become ready, with the boarding tick.
    fn pick_options(&self, key: Key, tick: Tick, free: u32) -> Vec<(u16, Tick)> {
        let here: Vec<usize> = bits(key.pending)
            .filter(|&i| self.origin[i] == key.station)
            .collect();
        let mut times: Vec<Tick> = here
            .iter()
            .map(|&i| self.rides[i].pickup_from.max(tick))
            .collect();
        times.sort_unstable();
        times.dedup();
        let mut out = Vec::new();
        for at in times {
            let ready: Vec<usize> = here
                .iter()
                .copied()
                .filter(|&i| {
                    let r = self.rides[i];
                    r.pickup_from <= at && r.latest_pickup.is_none_or(|l| at <= l)
                })
                .collect();
            for sel in 1u32..(1 << ready.len()) {
                let picked = ready
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| sel & (1 << b) != 0)
                    .fold(0u16, |m, (_, &i)| m | 1 << i);
                // a set that was already complete earlier is dominated by boarding it then
                let fresh = at == tick || bits(picked).any(|i| self.rides[i].pickup_from == at);
                if fresh && self.load(picked) <= free {
                    out.push((picked, at));
                }
            }
        }
        out
    }

    fn solve(&self) -> Result<(Vec<Label>, usize, usize), OracleError> {
        let n = self.rides.len();
        let mut labels: Vec<Label> = Vec::new();
        let mut front: HashMap<Key, Vec<usize>> = HashMap::new();
        let mut dead: Vec<bool> = Vec::new();
        let mut heap: BinaryHeap<Reverse<(Tick, Tick, usize)>> = BinaryHeap::new();
        let mut explored = 0;

        let mut push = |label: Label,
                        labels: &mut Vec<Label>,
                        dead: &mut Vec<bool>,
                        heap: &mut BinaryHeap<Reverse<(Tick, Tick, usize)>>| {
            let Some(f) = self.bound(label.key, label.tick, label.len) else {
                return;
            };
            let entry = front.entry(label.key).or_default();
            if entry
                .iter()
                .any(|&j| labels[j].tick <= label.tick && labels[j].len <= label.len)
            {
                return;
            }
            entry.retain(|&j| {
                let worse = labels[j].tick >= label.tick && labels[j].len >= label.len;
                if worse {
                    dead[j] = true;
                }
                !worse
            });
            let id = labels.len();
            entry.push(id);
            let tie = match self.objective {
                Objective::TotalTourLength => label.tick,
                Objective::Makespan => label.len,
            };
            labels.push(label);
            dead.push(false);
            heap.push(Reverse((f, tie, id)));
        };

        let all: u16 = if n == 0 { 0 } else { ((1u32 << n) - 1) as u16 };
        let root = Label {
            key: Key {
                station: self.depot,
                pending: all,
                onboard: 0,
            },
            tick: 0,
            len: 0,
            parent: None,
            picked: 0,
            pick_time: 0,
            drive: None,
            dropped: 0,
        };
        push(root, &mut labels, &mut dead, &mut heap);

        while let Some(Reverse((_, _, id))) = heap.pop() {
            if dead[id] {
                continue;
            }
            explored += 1;
            let Label { key, tick, len, .. } = labels[id].clone();
            if key.pending == 0 && key.onboard == 0 && key.station == self.depot {
                return Ok((labels, id, explored));
            }
            let s = key.station;
            let label = |key: Key, tick: Tick, len: Tick| Label {
                key,
                tick,
                len,
                parent: Some(id),
                picked: 0,
                pick_time: tick,
                drive: None,
                dropped: 0,
            };
            let free = self.capacity - self.load(key.onboard);

            // board now, then decide again from the new key
            for (picked, at) in self.pick_options(key, tick, free) {
                let next = Key {
                    pending: key.pending & !picked,
                    onboard: key.onboard | picked,
                    ..key
                };
                push(
                    Label {
                        picked,
                        pick_time: at,
                        ..label(next, at, len)
                    },
                    &mut labels,
                    &mut dead,
                    &mut heap,
                );
            }

            // drive on now; leaving later only arrives later at the same key
            let mut targets: Vec<usize> = bits(key.pending)
                .map(|i| self.origin[i])
                .chain(bits(key.onboard).map(|i| self.dest[i]))
                .collect();
            if key.pending == 0 && key.onboard == 0 {
                targets.push(self.depot);
            }
            targets.sort_unstable();
            targets.dedup();
            for u in targets.into_iter().filter(|&u| u != s) {
                let arrive = tick + self.dist[s][u];
                let dropped = self.drops(u, arrive, key.onboard);
                let path = self
                    .sub
                    .path(self.sub.stations()[s], self.sub.stations()[u])
                    .unwrap();
                let next = Key {
                    station: u,
                    onboard: key.onboard & !dropped,
                    ..key
                };
                push(
                    Label {
                        drive: Some((path, tick, arrive)),
                        dropped,
                        ..label(next, arrive, len + self.dist[s][u])
                    },
                    &mut labels,
                    &mut dead,
                    &mut heap,
                );
            }

            // stay until a passenger may leave here
            let reveal = bits(key.onboard)
                .filter(|&i| self.dest[i] == s)
                .map(|i| self.rides[i].destination_from)
                .filter(|&t| t > tick)
                .min();
            if let Some(t) = reveal {
                let dropped = self.drops(s, t, key.onboard);
                let next = Key {
                    onboard: key.onboard & !dropped,
                    ..key
                };
                push(
                    Label {
                        dropped,
                        ..label(next, t, len)
                    },
                    &mut labels,
                    &mut dead,
                    &mut heap,
                );
            }
        }
        Err(OracleError::Infeasible)
    }
}

/// Optimal tour for one vehicle over the given rides.
struct Solved {
    cost: Tick,
    tour: Tour,
    service: Vec<(RequestId, Option<RequestId>, ActionRef, ActionRef)>,
    explored: usize,
}

fn solve_one(
    instance: &Instance,
    vehicle: VehicleId,
    rides: Vec<&Ride>,
    objective: Objective,
) -> Result<Solved, OracleError> {
    let sub = instance.vehicle_subnetwork(vehicle);
    if rides.is_empty() {
        return Ok(Solved {
            cost: 0,
            tour: Tour::idle(vehicle, instance.depot(), sub.id()),
            service: Vec::new(),
            explored: 0,
        });
    }
    let search = Search::new(instance, sub, rides, objective);
    let (labels, goal, explored) = search.solve()?;
    let mut chain = vec![goal];
    while let Some(p) = labels[*chain.last().unwrap()].parent {
        chain.push(p);
    }
    chain.reverse();

    let mut builder = TourBuilder::new(vehicle, instance.depot(), sub.id());
    let mut pickups = BTreeMap::new();
    let mut deliveries = BTreeMap::new();
    for &id in &chain[1..] {
        let l = &labels[id];
        let entries = |mask: u16, sign: i64| -> Vec<(RequestId, i64)> {
            bits(mask)
                .map(|i| (search.rides[i].id, sign * i64::from(search.rides[i].load)))
                .collect()
        };
        if l.picked != 0 {
            let a = builder.act(l.pick_time, &entries(l.picked, 1));
            for i in bits(l.picked) {
                pickups.insert(i, a);
            }
        }
        if let Some((path, dep, arr)) = &l.drive {
            builder.travel(sub, path.clone(), *dep, *arr);
        }
        if l.dropped != 0 {
            let a = builder.act(l.tick, &entries(l.dropped, -1));
            for i in bits(l.dropped) {
                deliveries.insert(i, a);
            }
        }
    }
    let tour = builder.finish();
    let cost = match objective {
        Objective::TotalTourLength => tour.length(),
        Objective::Makespan => tour.end_time(),
    };
    let service = search
        .rides
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let at = |index| ActionRef { vehicle, index };
            (r.id, r.delivery_request, at(pickups[&i]), at(deliveries[&i]))
        })
        .collect();
    Ok(Solved {
        cost,
        tour,
        service,
        explored,
    })
}

fn check_size(instance: &Instance) -> Result<(), OracleError> {
    let too_large = |s: String| Err(OracleError::InstanceTooLarge(s));
    if instance.requests().len() > MAX_REQUESTS {
        return too_large(format!("{} requests (limit {MAX_REQUESTS})", instance.requests().len()));
    }
    if instance.fleet().vehicles > MAX_VEHICLES {
        return too_large(format!("{} vehicles (limit {MAX_VEHICLES})", instance.fleet().vehicles));
    }
    for v in instance.vehicles() {
        let n = instance.vehicle_subnetwork(v).stations().len();
        if n > MAX_STATIONS {
            return too_large(format!("{n} stations on one subnetwork (limit {MAX_STATIONS})"));
        }
    }
    Ok(())
}

/// Minimum cost over all offline schedules; rides may go to any vehicle
/// whose subnetwork covers them.
pub fn opt_cost(instance: &Instance, objective: Objective) -> Result<OptResult, OracleError> {
    check_size(instance)?;
    let rides = instance.rides();
    let vehicles: Vec<VehicleId> = instance.vehicles().collect();
    let n = rides.len();
    let covers: Vec<u32> = vehicles
        .iter()
        .map(|&v| {
            let sub = instance.vehicle_subnetwork(v);
            (0..n).filter(|&i| rides[i].covered_by(sub)).fold(0, |m, i| m | 1 << i)
        })
        .collect();
    let all = (1u32 << n) - 1;
    let mut memo: HashMap<(usize, u32), Result<Solved, OracleError>> = HashMap::new();
    let solve = |j: usize, mask: u32, memo: &mut HashMap<(usize, u32), Result<Solved, OracleError>>| {
        memo.entry((j, mask))
            .or_insert_with(|| {
                let subset = (0..n).filter(|&i| mask & (1 << i) != 0).map(|i| &rides[i]).collect();
                solve_one(instance, vehicles[j], subset, objective)
            });
    };

    // every split of the rides: vehicle 0 takes `mask`, vehicle 1 the rest
    let splits: Vec<Vec<u32>> = match vehicles.len() {
        1 => vec![vec![all]],
        _ => (0..=all)
            .filter(|&m| m & !covers[0] == 0 && (all & !m) & !covers[1] == 0)
            .map(|m| vec![m, all & !m])
            .collect(),
    };
    let mut best: Option<(Tick, &Vec<u32>)> = None;
    let mut explored = 0;
    for split in &splits {
        let mut total = 0;
        let mut feasible = true;
        for (j, &mask) in split.iter().enumerate() {
            let fresh = !memo.contains_key(&(j, mask));
            solve(j, mask, &mut memo);
            match &memo[&(j, mask)] {
                Ok(s) => {
                    if fresh {
                        explored += s.explored;
                    }
                    total = match objective {
                        Objective::TotalTourLength => total + s.cost,
                        Objective::Makespan => total.max(s.cost),
                    };
                }
                Err(OracleError::Infeasible) => feasible = false,
                Err(e) => return Err(e.clone()),
            }
        }
        if feasible && best.is_none_or(|(c, _)| total < c) {
            best = Some((total, split));
        }
    }
    let (total, split) = best.ok_or(OracleError::Infeasible)?;
    let mut schedule = Schedule {
        tours: Vec::new(),
        service: BTreeMap::new(),
    };
    for (j, &mask) in split.iter().enumerate() {
        let solved = memo[&(j, mask)].as_ref().unwrap();
        schedule.tours.push(solved.tour.clone());
        for &(id, delivery, pickup, drop) in &solved.service {
            let rec = ServiceRecord { pickup, delivery: drop };
            schedule.service.insert(id, rec);
            if let Some(d) = delivery {
                schedule.service.insert(d, rec);
            }
        }
    }
    debug_assert_eq!(cost(&schedule, objective), total);
    Ok(OptResult {
        cost: total,
        schedule,
        explored,
    })
}

/// Online cost divided by the optimum, as an exact fraction.
pub fn competitive_ratio(
    policy: &dyn PolicyFactory,
    instance: &Instance,
    objective: Objective,
) -> Result<Ratio<u64>, OracleError> {
    let online = run_online(instance, policy)?;
    let alg = cost(&online.schedule, objective);
    let opt = opt_cost(instance, objective)?.cost;
    if opt == 0 {
        return Err(OracleError::ZeroOptimum { alg });
    }
    Ok(Ratio::new(alg, opt))
}
