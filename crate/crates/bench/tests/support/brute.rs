//! Exhaustive single-vehicle solver: every order of pickups and drop-offs,
//! each event taken at its earliest feasible tick.

use shuttle_core::{Instance, Objective, Ride, StationId, Subnetwork, Tick};

struct Walk<'a> {
    sub: &'a Subnetwork,
    rides: &'a [Ride],
    cap: u32,
    depot: StationId,
    objective: Objective,
    best: Option<Tick>,
}

impl Walk<'_> {
    fn go(&mut self, at: StationId, time: Tick, len: Tick, load: u32, picked: u32, dropped: u32) {
        let n = self.rides.len();
        if dropped == (1 << n) - 1 {
            let back = self.sub.travel(at, self.depot).unwrap();
            let c = match self.objective {
                Objective::TotalTourLength => len + back,
                Objective::Makespan => time + back,
            };
            self.best = Some(self.best.map_or(c, |b| b.min(c)));
            return;
        }
        for (i, r) in self.rides.iter().enumerate() {
            let bit = 1 << i;
            if picked & bit == 0 {
                if load + r.load > self.cap {
                    continue;
                }
                let d = self.sub.travel(at, r.origin).unwrap();
                let t = (time + d).max(r.pickup_from);
                if r.latest_pickup.is_some_and(|q| t > q) {
                    continue;
                }
                self.go(r.origin, t, len + d, load + r.load, picked | bit, dropped);
            } else if dropped & bit == 0 {
                let d = self.sub.travel(at, r.destination).unwrap();
                let t = (time + d).max(r.destination_from);
                if r.deadline.is_some_and(|q| t > q) {
                    continue;
                }
                self.go(r.destination, t, len + d, load - r.load, picked, dropped | bit);
            }
        }
    }
}

/// Optimum over all interleavings; `None` when no order meets every window.
pub fn brute_force(inst: &Instance, objective: Objective) -> Option<Tick> {
    assert_eq!(inst.fleet().vehicles, 1, "brute force handles one vehicle");
    let sub = &inst.subnetworks()[0];
    let mut w = Walk {
        sub,
        rides: inst.rides(),
        cap: inst.capacity(),
        depot: inst.depot(),
        objective,
        best: None,
    };
    w.go(inst.depot(), 0, 0, 0, 0, 0);
    w.best
}
