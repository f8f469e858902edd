mod common;

use common::*;
use num_rational::Ratio;
use proptest::prelude::*;
use shuttle_core::algorithms::PolicyKind;
use shuttle_core::engine::run_online;
use shuttle_core::oracle::{competitive_ratio, opt_cost, OracleError};
use shuttle_core::schedule::{cost, validate_schedule, ValidationOptions};
use shuttle_core::{FleetConfig, Instance, Network, Objective, Request, Scenario, Subnetwork, SubnetworkId, SubnetworkKind};

fn opt(inst: &Instance, objective: Objective) -> u64 {
    let r = opt_cost(inst, objective).unwrap();
    assert!(validate_schedule(&r.schedule, inst, ValidationOptions::default()).is_empty());
    assert_eq!(cost(&r.schedule, objective), r.cost);
    r.cost
}

#[test]
fn example_optima() {
    assert_eq!(opt(&example_one(4, 3), Objective::TotalTourLength), 4);
    let ex2 = circuit(4, 2, 2, vec![pdp(0, 0, 1, 4, 1), pdp(1, 1, 1, 4, 1)], Objective::Makespan);
    assert_eq!(opt(&ex2, Objective::Makespan), 9);
    let ex3 = circuit(5, 1, 2, vec![pdp(0, 4, 5, 1, 2)], Objective::Makespan);
    assert_eq!(opt(&ex3, Objective::Makespan), 5);
    let ex4 = circuit(4, 1, 3, vec![pdp(0, 0, 1, 4, 1), pdp(1, 4, 1, 4, 2), pdp(2, 4, 1, 4, 1)], Objective::Makespan);
    assert_eq!(opt(&ex4, Objective::Makespan), 8);
    let ex5 = line(&[0, 1, 2, 3, 4], 2, 2, vec![pdp(0, 0, 0, 4, 1), pdp(1, 1, 0, 4, 1)], Objective::Makespan);
    assert_eq!(opt(&ex5, Objective::Makespan), 17);
}

#[test]
fn empty_sequence_costs_nothing() {
    let inst = circuit(4, 1, 1, vec![], Objective::Makespan);
    let r = opt_cost(&inst, Objective::Makespan).unwrap();
    assert_eq!(r.cost, 0);
    assert!(r.schedule.tours.iter().all(|t| t.length() == 0));
}

#[test]
fn exact_ratios() {
    let ex1 = example_one(4, 3);
    assert_eq!(
        competitive_ratio(&PolicyKind::Sir, &ex1, Objective::TotalTourLength).unwrap(),
        Ratio::from_integer(12)
    );
    let ex3 = circuit(5, 1, 2, vec![pdp(0, 4, 5, 1, 2)], Objective::Makespan);
    assert_eq!(competitive_ratio(&PolicyKind::SifE, &ex3, Objective::Makespan).unwrap(), Ratio::new(9, 5));
    let ex5 = line(&[0, 1, 2, 3, 4], 2, 2, vec![pdp(0, 0, 0, 4, 1), pdp(1, 1, 0, 4, 1)], Objective::Makespan);
    assert_eq!(competitive_ratio(&PolicyKind::Main, &ex5, Objective::Makespan).unwrap(), Ratio::new(32, 17));
    let empty = circuit(3, 1, 1, vec![], Objective::Makespan);
    assert_eq!(
        competitive_ratio(&PolicyKind::Sir, &empty, Objective::Makespan),
        Err(OracleError::ZeroOptimum { alg: 0 })
    );
}

#[test]
fn guard_and_infeasibility() {
    let many = (0..13).map(|i| pdp(i, 0, 1, 2, 1)).collect();
    assert!(matches!(
        opt_cost(&circuit(3, 1, 1, many, Objective::Makespan), Objective::Makespan),
        Err(OracleError::InstanceTooLarge(_))
    ));
    let big = circuit(9, 1, 1, vec![pdp(0, 0, 1, 2, 1)], Objective::Makespan);
    assert!(matches!(opt_cost(&big, Objective::Makespan), Err(OracleError::InstanceTooLarge(_))));
    // the window at v3 closes before the vehicle can get there from the depot
    let late = circuit(4, 1, 1, vec![Request::full(0, 0, s(3), s(4), (0, 1), 1)], Objective::Makespan);
    assert_eq!(opt_cost(&late, Objective::Makespan).unwrap_err(), OracleError::Infeasible);
}

#[test]
fn two_vehicles_split_the_work() {
    let net = Network::from_edges(1..=5, [(1, 2, 1), (2, 3, 1), (3, 1, 1), (1, 4, 2), (4, 5, 2), (5, 1, 2)], 1).unwrap();
    let a = Subnetwork::new(SubnetworkId(0), SubnetworkKind::Circuit, vec![s(1), s(2), s(3)], 0, &net).unwrap();
    let b = Subnetwork::new(SubnetworkId(1), SubnetworkKind::Circuit, vec![s(1), s(4), s(5)], 0, &net).unwrap();
    let inst = Instance::new(
        net,
        vec![a, b],
        FleetConfig::round_robin(2, 1, &[SubnetworkId(0), SubnetworkId(1)]),
        vec![pdp(0, 0, 1, 2, 1), pdp(1, 0, 4, 5, 1), pdp(2, 0, 2, 3, 1)],
        Scenario::Other,
        Objective::Makespan,
    )
    .unwrap();
    assert_eq!(opt(&inst, Objective::Makespan), 6);
    assert_eq!(opt(&inst, Objective::TotalTourLength), 9);
}

#[test]
fn toward_origin_oscillation_fixture() {
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
    assert_eq!(opt(&lb, Objective::TotalTourLength), 6);
}

fn circuit_inst() -> impl Strategy<Value = Instance> {
    (3u32..=5, 1u32..=2, 1u64..=2).prop_flat_map(|(n, cap, scale)| {
        let req = (0u64..12, 1..=n, 1..n, 1..=cap);
        proptest::collection::vec(req, 1..5).prop_map(move |raw| {
            let reqs = raw
                .iter()
                .enumerate()
                .map(|(i, &(t, x, off, z))| pdp(i as u32, t, x, (x - 1 + off) % n + 1, z))
                .collect();
            circuit(n, scale, cap, reqs, Objective::TotalTourLength)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn single_request_closed_form(n in 3u32..=6, x in 1u32..=6, y in 1u32..=6, t in 0u64..10, on_line in any::<bool>()) {
        prop_assume!(x <= n && y <= n && x != y);
        let inst = if on_line {
            let st: Vec<u32> = (1..=n).collect();
            line(&st, 1, 1, vec![pdp(0, t, x, y, 1)], Objective::TotalTourLength)
        } else {
            circuit(n, 1, 1, vec![pdp(0, t, x, y, 1)], Objective::TotalTourLength)
        };
        let sub = &inst.subnetworks()[0];
        let d = |a: u32, b: u32| sub.travel(s(a), s(b)).unwrap();
        prop_assert_eq!(opt(&inst, Objective::TotalTourLength), d(1, x) + d(x, y) + d(y, 1));
    }

    #[test]
    fn oracle_never_loses_to_sir(inst in circuit_inst()) {
        let online = run_online(&inst, &PolicyKind::Sir).unwrap().schedule;
        for objective in [Objective::TotalTourLength, Objective::Makespan] {
            prop_assert!(opt(&inst, objective) <= cost(&online, objective));
        }
    }

    #[test]
    fn adding_a_request_never_helps(inst in circuit_inst(), t in 0u64..12, x in 1u32..=3) {
        let before = opt(&inst, Objective::TotalTourLength);
        let mut reqs = inst.requests().to_vec();
        reqs.push(pdp(99, t, x, x % 3 + 1, 1));
        let more = inst.with_requests(reqs).unwrap();
        prop_assert!(opt(&more, Objective::TotalTourLength) >= before);
    }
}
