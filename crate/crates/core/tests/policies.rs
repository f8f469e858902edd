mod common;

use common::*;
use proptest::prelude::*;
use shuttle_core::algorithms::{PolicyError, PolicyKind};
use shuttle_core::engine::{run_online, EngineError};
use shuttle_core::schedule::{makespan, total_length, validate_schedule, Schedule, ValidationOptions};
use shuttle_core::{Instance, Objective, Request, StationId};

fn run(kind: PolicyKind, inst: &Instance) -> Schedule {
    run_online(inst, &kind).unwrap().schedule
}

#[test]
fn sir_examples() {
    assert_eq!(total_length(&run(PolicyKind::Sir, &example_one(4, 3))), 48);
    let ex2 = circuit(4, 2, 2, vec![pdp(0, 0, 1, 4, 1), pdp(1, 1, 1, 4, 1)], Objective::Makespan);
    assert_eq!(makespan(&run(PolicyKind::Sir, &ex2)), 16);
    let single = circuit(4, 1, 1, vec![pdp(0, 0, 1, 2, 1)], Objective::TotalTourLength);
    assert_eq!(total_length(&run(PolicyKind::Sir, &single)), 4);
}

#[test]
fn sir_carries_a_waiting_rider_past_the_origin() {
    // 3 -> 2 wraps around the origin of the circuit 1 -> 2 -> 3 -> 4
    let inst = circuit(4, 1, 1, vec![pdp(0, 0, 3, 2, 1)], Objective::TotalTourLength);
    assert_eq!(total_length(&run(PolicyKind::Sir, &inst)), 8);
}

#[test]
fn sif_m_examples() {
    let ex4 = circuit(
        4,
        1,
        3,
        vec![pdp(0, 0, 1, 4, 1), pdp(1, 4, 1, 4, 2), pdp(2, 4, 1, 4, 1)],
        Objective::Makespan,
    );
    assert_eq!(makespan(&run(PolicyKind::SifM, &ex4)), 12);
    let full = circuit(4, 1, 2, vec![pdp(0, 0, 1, 2, 1), pdp(1, 0, 1, 3, 1)], Objective::TotalTourLength);
    assert_eq!(total_length(&run(PolicyKind::SifM, &full)), 4);
    let prefix = circuit(4, 1, 3, (0..3).map(|i| pdp(i, u64::from(i) * 4, 1, 2, 1)).collect(), Objective::TotalTourLength);
    assert_eq!(total_length(&run(PolicyKind::SifM, &prefix)), 4);
}

#[test]
fn sif_e_examples() {
    let ex3 = circuit(5, 1, 2, vec![pdp(0, 4, 5, 1, 2)], Objective::Makespan);
    assert_eq!(makespan(&run(PolicyKind::SifE, &ex3)), 9);
    let along = circuit(4, 1, 3, vec![pdp(0, 0, 2, 1, 1), pdp(1, 0, 3, 1, 1), pdp(2, 0, 4, 1, 1)], Objective::TotalTourLength);
    assert_eq!(total_length(&run(PolicyKind::SifE, &along)), 4);
    let heavy = circuit(4, 1, 2, vec![pdp(0, 0, 2, 1, 2), pdp(1, 0, 3, 1, 2)], Objective::TotalTourLength);
    assert_eq!(total_length(&run(PolicyKind::SifE, &heavy)), 8);
}

#[test]
fn main_examples() {
    let ex5 = line(&[0, 1, 2, 3, 4], 2, 2, vec![pdp(0, 0, 0, 4, 1), pdp(1, 1, 0, 4, 1)], Objective::Makespan);
    assert_eq!(makespan(&run(PolicyKind::Main, &ex5)), 32);
    let single = line(&[1, 2, 3, 4], 1, 1, vec![pdp(0, 0, 1, 4, 1)], Objective::TotalTourLength);
    assert_eq!(total_length(&run(PolicyKind::Main, &single)), 6);
    // one toward-origin request per trip, released as MAIN gets back to the origin
    let lb = line(
        &[1, 2, 3, 4],
        1,
        2,
        vec![
            pdp(0, 0, 2, 1, 1),
            pdp(1, 2, 2, 1, 1),
            pdp(2, 4, 3, 2, 1),
            pdp(3, 8, 3, 2, 1),
            pdp(4, 12, 4, 3, 1),
            pdp(5, 18, 4, 3, 1),
        ],
        Objective::TotalTourLength,
    );
    assert_eq!(total_length(&run(PolicyKind::Main, &lb)), 24);
}

#[test]
fn scenario_misfits_are_rejected() {
    let off = circuit(4, 1, 2, vec![pdp(0, 0, 2, 3, 1)], Objective::Makespan);
    assert!(matches!(
        run_online(&off, &PolicyKind::SifM),
        Err(EngineError::Policy { error: PolicyError::NonOriginPickup(_), .. })
    ));
    assert!(matches!(
        run_online(&off, &PolicyKind::SifE),
        Err(EngineError::Policy { error: PolicyError::NonOriginDropoff(_), .. })
    ));
    assert!(matches!(
        run_online(&off, &PolicyKind::Main),
        Err(EngineError::Policy { error: PolicyError::AssignedToCircuit(_), .. })
    ));
    assert_eq!(PolicyKind::parse("sif_e").unwrap(), PolicyKind::SifE);
    assert!(PolicyKind::parse("mrin").is_err());
}

#[derive(Clone, Copy, Debug)]
enum Shape {
    Morning,
    Evening,
    Free,
}

fn random_requests(shape: Shape, n: u32) -> impl Strategy<Value = Vec<(u64, u32, u32)>> {
    let one = (0u64..30, 2..=n, 1..=n).prop_map(move |(t, a, b)| match shape {
        Shape::Morning => (t, 1, a),
        Shape::Evening => (t, a, 1),
        Shape::Free => (t, b, if a == b { b % n + 1 } else { a }),
    });
    proptest::collection::vec(one, 1..8)
}

fn circuit_case(shape: Shape) -> impl Strategy<Value = Instance> {
    (3u32..=6, 1u32..=3, 1u64..=2).prop_flat_map(move |(n, cap, scale)| {
        random_requests(shape, n).prop_map(move |raw| {
            let reqs = raw.iter().enumerate().map(|(i, &(t, x, y))| pdp(i as u32, t, x, y, 1)).collect();
            circuit(n, scale, cap, reqs, Objective::TotalTourLength)
        })
    })
}

fn line_case(shape: Shape) -> impl Strategy<Value = Instance> {
    (3u32..=6, 1u32..=3, 1u64..=2).prop_flat_map(move |(n, cap, scale)| {
        random_requests(shape, n).prop_map(move |raw| {
            let reqs = raw.iter().enumerate().map(|(i, &(t, x, y))| pdp(i as u32, t, x, y, 1)).collect();
            let stations: Vec<u32> = (1..=n).collect();
            line(&stations, scale, cap, reqs, Objective::Makespan)
        })
    })
}

fn valid(s: &Schedule, inst: &Instance) -> bool {
    validate_schedule(s, inst, ValidationOptions::default()).is_empty()
}

proptest! {
    #[test]
    fn sir_runs_full_rounds(inst in circuit_case(Shape::Free)) {
        let s = run(PolicyKind::Sir, &inst);
        prop_assert!(valid(&s, &inst));
        prop_assert_eq!(total_length(&s) % inst.subnetworks()[0].length(), 0);
    }

    #[test]
    fn sif_m_leaves_full_except_last(inst in circuit_case(Shape::Morning)) {
        let s = run(PolicyKind::SifM, &inst);
        prop_assert!(valid(&s, &inst));
        let loads: Vec<u32> = s.tours[0].moves.iter()
            .filter(|m| !m.is_stay() && m.origin == StationId(1))
            .map(|m| m.load)
            .collect();
        if let Some((_, rest)) = loads.split_last() {
            prop_assert!(rest.iter().all(|&l| l == inst.capacity()), "{:?}", loads);
        }
    }

    #[test]
    fn sif_e_returns_full_except_last(inst in circuit_case(Shape::Evening)) {
        let s = run(PolicyKind::SifE, &inst);
        prop_assert!(valid(&s, &inst));
        let loads: Vec<u32> = s.tours[0].moves.iter()
            .filter(|m| !m.is_stay() && m.destination == StationId(1))
            .map(|m| m.load)
            .collect();
        if let Some((_, rest)) = loads.split_last() {
            prop_assert!(rest.iter().all(|&l| l == inst.capacity()), "{:?}", loads);
        }
    }

    #[test]
    fn main_turns_only_where_it_serves(inst in line_case(Shape::Free)) {
        let s = run(PolicyKind::Main, &inst);
        prop_assert!(valid(&s, &inst));
        let tour = &s.tours[0];
        let sub = &inst.subnetworks()[0];
        let pos: Vec<usize> = tour.station_walk().iter().map(|&x| sub.position(x).unwrap()).collect();
        let mut walk = pos.clone();
        walk.dedup();
        let last = sub.stations().len() - 1;
        for w in walk.windows(3) {
            let turns = (w[1] > w[0]) != (w[2] > w[1]);
            if turns {
                let station = sub.stations()[w[1]];
                let served_here = tour.actions.iter().any(|a| a.station == station && !a.served.is_empty());
                prop_assert!(w[1] == 0 || w[1] == last || served_here, "turn at {:?}", station);
            }
        }
    }

    #[test]
    fn main_serves_morning_lines(inst in line_case(Shape::Morning)) {
        prop_assert!(valid(&run(PolicyKind::Main, &inst), &inst));
    }
}

#[test]
fn paired_requests_reveal_the_destination_late() {
    let pair = vec![Request::pickup(0, 0, s(1), 1), Request::delivery(1, 3, s(3), 0)];
    let inst = circuit(4, 1, 2, pair, Objective::TotalTourLength);
    // SIR passes v3 at tick 2, before the destination is known, and goes round again
    for (kind, len) in [(PolicyKind::Sir, 8), (PolicyKind::SifM, 4)] {
        let s = run(kind, &inst);
        assert!(valid(&s, &inst), "{kind}");
        assert_eq!(total_length(&s), len, "{kind}");
    }
    assert!(matches!(
        run_online(&inst, &PolicyKind::SifE),
        Err(EngineError::Policy { error: PolicyError::NonOriginPickup(_) | PolicyError::UnsupportedRequest { .. }, .. })
    ));
}
