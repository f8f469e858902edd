//! Customer requests and the tasks an operator derives from them.

use std::fmt;

use crate::error::ModelError;
use crate::network::{MetricClosure, StationId, Subnetwork, SubnetworkId};
use crate::Tick;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RequestId(pub u32);

impl fmt::Display for RequestId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RequestKind {
    /// Simple call-box: release date and origin only.
    Pickup,
    /// Sent from inside a vehicle: release date and destination only.
    Delivery,
    /// Evolved call-box: origin, destination and passenger count.
    Pdp,
    /// Web booking: everything, including an `[earliest, latest]` window.
    Full,
}

impl RequestKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RequestKind::Pickup => "pickup",
            RequestKind::Delivery => "delivery",
            RequestKind::Pdp => "pdp",
            RequestKind::Full => "full",
        }
    }
}

/// A request `(t, x, y, p, q, z)`; fields a kind does not carry are `None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Request {
    pub id: RequestId,
    pub kind: RequestKind,
    pub release: Tick,
    pub origin: Option<StationId>,
    pub destination: Option<StationId>,
    pub earliest: Option<Tick>,
    pub latest: Option<Tick>,
    pub load: u32,
    /// Links a pickup request with the delivery request its passenger sends after boarding.
    pub pair: Option<RequestId>,
}

impl Request {
    pub fn pdp(id: u32, release: Tick, origin: StationId, destination: StationId, load: u32) -> Self {
        Request {
            id: RequestId(id),
            kind: RequestKind::Pdp,
            release,
            origin: Some(origin),
            destination: Some(destination),
            earliest: None,
            latest: None,
            load,
            pair: None,
        }
    }

    pub fn full(
        id: u32,
        release: Tick,
        origin: StationId,
        destination: StationId,
        window: (Tick, Tick),
        load: u32,
    ) -> Self {
        Request {
            kind: RequestKind::Full,
            earliest: Some(window.0),
            latest: Some(window.1),
            ..Request::pdp(id, release, origin, destination, load)
        }
    }

    pub fn pickup(id: u32, release: Tick, origin: StationId, delivery: u32) -> Self {
        Request {
            id: RequestId(id),
            kind: RequestKind::Pickup,
            release,
            origin: Some(origin),
            destination: None,
            earliest: None,
            latest: None,
            load: 1,
            pair: Some(RequestId(delivery)),
        }
    }

    pub fn delivery(id: u32, release: Tick, destination: StationId, pickup: u32) -> Self {
        Request {
            id: RequestId(id),
            kind: RequestKind::Delivery,
            release,
            origin: None,
            destination: Some(destination),
            earliest: None,
            latest: None,
            load: 1,
            pair: Some(RequestId(pickup)),
        }
    }

    /// Checks the per-kind field rules against the metric.
    pub fn validate(&self, metric: &MetricClosure) -> Result<(), ModelError> {
        let bad = |reason: &str| ModelError::BadRequest {
            request: self.id,
            reason: reason.to_string(),
        };
        let (needs_x, needs_y, needs_window) = match self.kind {
            RequestKind::Pickup => (true, false, false),
            RequestKind::Delivery => (false, true, false),
            RequestKind::Pdp => (true, true, false),
            RequestKind::Full => (true, true, true),
        };
        if needs_x != self.origin.is_some() {
            return Err(bad(if needs_x { "missing origin" } else { "unexpected origin" }));
        }
        if needs_y != self.destination.is_some() {
            return Err(bad(if needs_y {
                "missing destination"
            } else {
                "unexpected destination"
            }));
        }
        if needs_window != (self.earliest.is_some() && self.latest.is_some())
            || (!needs_window && (self.earliest.is_some() || self.latest.is_some()))
        {
            return Err(bad("time window present iff the request is a full request"));
        }
        for s in self.origin.iter().chain(self.destination.iter()) {
            if metric.get(*s, *s).is_none() {
                return Err(ModelError::UnknownStation(*s));
            }
        }
        if self.load == 0 {
            return Err(bad("passenger count must be at least 1"));
        }
        match self.kind {
            RequestKind::Pickup | RequestKind::Delivery => {
                if self.load != 1 {
                    return Err(bad("pickup and delivery requests carry one passenger"));
                }
                if self.pair.is_none() {
                    return Err(bad("pickup and delivery requests must be paired"));
                }
            }
            RequestKind::Pdp | RequestKind::Full => {
                if self.pair.is_some() {
                    return Err(bad("only pickup and delivery requests are paired"));
                }
                if self.origin == self.destination {
                    return Err(bad("origin equals destination"));
                }
            }
        }
        if let (Some(p), Some(q), Some(x), Some(y)) =
            (self.earliest, self.latest, self.origin, self.destination)
        {
            if q < p + metric.dist(x, y) {
                return Err(ModelError::InfeasibleWindow(self.id));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaskKind {
    Pickup,
    Delivery,
    Pdp,
    /// Scheduled pickup and delivery ticks.
    Full { pick: Tick, drop: Tick },
}

/// An operator task handed to a vehicle of one subnetwork.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Task {
    pub kind: TaskKind,
    pub source: RequestId,
    pub subnetwork: SubnetworkId,
    pub release: Tick,
    pub origin: Option<StationId>,
    pub destination: Option<StationId>,
    pub load: u32,
    pub window: Option<(Tick, Tick)>,
}

impl Task {
    /// Verifies the task invariants (window bounds, stations on the subnetwork).
    pub fn check(&self, sub: &Subnetwork, metric: &MetricClosure) -> bool {
        if sub.id() != self.subnetwork {
            return false;
        }
        if !self
            .origin
            .iter()
            .chain(self.destination.iter())
            .all(|&s| sub.contains(s))
        {
            return false;
        }
        match (self.kind, self.window, self.origin, self.destination) {
            (TaskKind::Full { pick, drop }, Some((p, q)), Some(x), Some(y)) => {
                let d = metric.dist(x, y);
                p <= pick && pick + d <= q && p + d <= drop && drop <= q
            }
            (TaskKind::Full { .. }, ..) => false,
            _ => true,
        }
    }
}

/// Turns a request into a task on the first subnetwork covering its stations.
///
/// Full tasks get the earliest feasible times: `pick = max(p, t)` and
/// `drop = pick + d(x, y)`.
pub fn make_task(
    request: &Request,
    subnetworks: &[Subnetwork],
    metric: &MetricClosure,
) -> Result<Task, ModelError> {
    request.validate(metric)?;
    let needed: Vec<StationId> = request
        .origin
        .iter()
        .chain(request.destination.iter())
        .copied()
        .collect();
    let sub = subnetworks
        .iter()
        .find(|s| needed.iter().all(|&st| s.contains(st)))
        .ok_or(ModelError::NoCoveringSubnetwork(request.id))?;
    let kind = match request.kind {
        RequestKind::Pickup => TaskKind::Pickup,
        RequestKind::Delivery => TaskKind::Delivery,
        RequestKind::Pdp => TaskKind::Pdp,
        RequestKind::Full => {
            let (p, q) = (request.earliest.unwrap(), request.latest.unwrap());
            let d = metric.dist(request.origin.unwrap(), request.destination.unwrap());
            let pick = p.max(request.release);
            if pick + d > q {
                return Err(ModelError::InfeasibleWindow(request.id));
            }
            TaskKind::Full {
                pick,
                drop: pick + d,
            }
        }
    };
    Ok(Task {
        kind,
        source: request.id,
        subnetwork: sub.id(),
        release: request.release,
        origin: request.origin,
        destination: request.destination,
        load: request.load,
        window: request.earliest.zip(request.latest),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{build_metric, Network, SubnetworkKind};
    use proptest::prelude::*;

    fn s(i: u32) -> StationId {
        StationId(i)
    }

    /// Unit circuit 1..=4 plus a disjoint-ish line 5-6 hanging off station 3.
    fn world() -> (Network, MetricClosure, Vec<Subnetwork>) {
        let net = Network::from_edges(
            1..=6,
            [(1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 1, 1), (3, 5, 2), (5, 6, 2)],
            1,
        )
        .unwrap();
        let m = build_metric(&net).unwrap();
        let c = Subnetwork::new(
            SubnetworkId(0),
            SubnetworkKind::Circuit,
            vec![s(1), s(2), s(3), s(4)],
            0,
            &net,
        )
        .unwrap();
        let l = Subnetwork::new(SubnetworkId(1), SubnetworkKind::Line, vec![s(5), s(6)], 0, &net)
            .unwrap();
        (net, m, vec![c, l])
    }

    #[test]
    fn pdp_task_copies_fields() {
        let (_, m, subs) = world();
        let r = Request::pdp(0, 0, s(1), s(2), 1);
        let t = make_task(&r, &subs, &m).unwrap();
        assert_eq!(t.kind, TaskKind::Pdp);
        assert_eq!(t.subnetwork, SubnetworkId(0));
        assert_eq!((t.origin, t.destination, t.load), (Some(s(1)), Some(s(2)), 1));
        assert!(t.check(&subs[0], &m));
    }

    #[test]
    fn full_task_takes_earliest_feasible_times() {
        // unit line 0..=4, so d(0, 4) = 4
        let net = Network::from_edges(0..5, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 1)], 0).unwrap();
        let m2 = build_metric(&net).unwrap();
        let line = Subnetwork::new(
            SubnetworkId(3),
            SubnetworkKind::Line,
            (0..5).map(StationId).collect(),
            0,
            &net,
        )
        .unwrap();
        let r = Request::full(1, 0, s(0), s(4), (5, 20), 2);
        let t = make_task(&r, std::slice::from_ref(&line), &m2).unwrap();
        assert_eq!(t.kind, TaskKind::Full { pick: 5, drop: 9 });
        assert!(t.check(&line, &m2));
    }

    #[test]
    fn disjoint_stations_have_no_covering_subnetwork() {
        let (_, m, subs) = world();
        let r = Request::pdp(4, 0, s(1), s(6), 1);
        assert_eq!(
            make_task(&r, &subs, &m),
            Err(ModelError::NoCoveringSubnetwork(RequestId(4)))
        );
    }

    #[test]
    fn late_release_breaks_the_window() {
        let (_, m, subs) = world();
        // window [0, 3] with d(1, 3) = 2 is feasible on its own, but release 2 leaves no slack
        let r = Request::full(2, 2, s(1), s(3), (0, 3), 1);
        assert_eq!(make_task(&r, &subs, &m), Err(ModelError::InfeasibleWindow(RequestId(2))));
        let r = Request::full(2, 0, s(1), s(3), (0, 1), 1);
        assert_eq!(r.validate(&m), Err(ModelError::InfeasibleWindow(RequestId(2))));
    }

    #[test]
    fn kind_specific_fields_are_enforced() {
        let (_, m, _) = world();
        let mut r = Request::pdp(0, 0, s(1), s(1), 1);
        assert!(r.validate(&m).is_err());
        r.destination = Some(s(2));
        r.load = 0;
        assert!(r.validate(&m).is_err());
        let mut p = Request::pickup(1, 0, s(1), 2);
        assert!(p.validate(&m).is_ok());
        p.pair = None;
        assert!(p.validate(&m).is_err());
        assert!(Request::delivery(2, 3, s(2), 1).validate(&m).is_ok());
    }

    proptest! {
        #[test]
        fn make_task_is_total_on_valid_requests(
            x in 1u32..=4, y in 1u32..=4, t in 0u64..20, p in 0u64..20, slack in 0u64..10, z in 1u32..4, full in any::<bool>()
        ) {
            prop_assume!(x != y);
            let (_, m, subs) = world();
            let d = m.dist(s(x), s(y));
            let r = if full {
                // latest pickup at or after release keeps the window feasible
                let q = p.max(t) + d + slack;
                Request::full(0, t, s(x), s(y), (p, q), z)
            } else {
                Request::pdp(0, t, s(x), s(y), z)
            };
            let task = make_task(&r, &subs, &m).unwrap();
            let sub = subs.iter().find(|sn| sn.id() == task.subnetwork).unwrap();
            prop_assert!(task.check(sub, &m));
        }
    }
}
