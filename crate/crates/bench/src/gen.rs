//! Instance generators: the adversarial fixtures and seeded random scenarios.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use shuttle_core::network::{Edge, Node};
use shuttle_core::{
    FleetConfig, Instance, ModelError, Network, Objective, Request, Scenario, StationId, Subnetwork, SubnetworkId,
    SubnetworkKind, Tick,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("unknown generator {0:?}")]
    UnknownGenerator(String),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub const EXAMPLES: [&str; 6] = [
    "ex1_sir_length",
    "ex2_sir_makespan",
    "ex3_sife_makespan",
    "ex4_sifm_makespan",
    "ex5_main_makespan",
    "main_length_lb",
];

/// Overrides for the fixture defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleParams {
    pub n: Option<u32>,
    pub cap: Option<u32>,
    pub scale: Option<Tick>,
}

/// Costs the fixture is built to produce; `None` where only the oracle knows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Expected {
    pub policy: &'static str,
    pub objective: Objective,
    pub alg: Tick,
    pub opt: Option<Tick>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Circuit,
    Line,
}

impl Layout {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "circuit" => Some(Layout::Circuit),
            "line" => Some(Layout::Line),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Layout::Circuit => "circuit",
            Layout::Line => "line",
        }
    }
}

fn world(
    layout: Layout,
    stations: &[u32],
    lengths: &[Tick],
    labels: &dyn Fn(u32) -> Option<&'static str>,
) -> Result<(Network, Subnetwork), GenError> {
    let nodes = stations
        .iter()
        .map(|&id| Node {
            id: StationId(id),
            label: labels(id).map(str::to_string),
        })
        .collect();
    let hops = match layout {
        Layout::Circuit => stations.len(),
        Layout::Line => stations.len() - 1,
    };
    let edges = (0..hops)
        .map(|i| Edge {
            u: StationId(stations[i]),
            v: StationId(stations[(i + 1) % stations.len()]),
            len: lengths[i],
        })
        .collect();
    let net = Network::new(nodes, edges, StationId(stations[0]))?;
    let kind = match layout {
        Layout::Circuit => SubnetworkKind::Circuit,
        Layout::Line => SubnetworkKind::Line,
    };
    let sub = Subnetwork::new(
        SubnetworkId(0),
        kind,
        stations.iter().map(|&s| StationId(s)).collect(),
        0,
        &net,
    )?;
    Ok((net, sub))
}

fn single_vehicle(
    (net, sub): (Network, Subnetwork),
    cap: u32,
    requests: Vec<Request>,
    scenario: Scenario,
    objective: Objective,
) -> Result<Instance, GenError> {
    let fleet = FleetConfig::round_robin(1, cap, &[sub.id()]);
    Ok(Instance::new(net, vec![sub], fleet, requests, scenario, objective)?)
}

fn parking_first(id: u32) -> Option<&'static str> {
    Some(if id == 1 { "parking" } else { "building" })
}

fn parking_zero(id: u32) -> Option<&'static str> {
    Some(if id == 0 { "parking" } else { "building" })
}

fn no_label(_: u32) -> Option<&'static str> {
    None
}

fn pdp(id: u32, t: Tick, x: u32, y: u32, z: u32) -> Request {
    Request::pdp(id, t, StationId(x), StationId(y), z)
}

fn bad(msg: impl Into<String>) -> GenError {
    GenError::BadParams(msg.into())
}

/// Resolved parameters of a fixture.
fn resolve(name: &str, p: ExampleParams) -> Result<(u32, u32, Tick), GenError> {
    let (n, cap, scale) = match name {
        "ex1_sir_length" => (4, 3, 1),
        "ex2_sir_makespan" => (4, 2, 2),
        "ex3_sife_makespan" => (5, 2, 1),
        "ex4_sifm_makespan" => (4, 3, 1),
        "ex5_main_makespan" => (4, 2, 2),
        "main_length_lb" => (4, 2, 1),
        other => return Err(GenError::UnknownGenerator(other.to_string())),
    };
    let (n, cap, scale) = (p.n.unwrap_or(n), p.cap.unwrap_or(cap), p.scale.unwrap_or(scale));
    let min_n = if matches!(name, "ex5_main_makespan" | "main_length_lb") { 2 } else { 3 };
    if n < min_n || cap == 0 || scale == 0 {
        return Err(bad(format!("{name} needs n >= {min_n}, cap >= 1, scale >= 1")));
    }
    if name == "ex4_sifm_makespan" && cap < 2 {
        return Err(bad("ex4_sifm_makespan needs cap >= 2"));
    }
    if name == "ex2_sir_makespan" && cap < 2 {
        return Err(bad("ex2_sir_makespan needs cap >= 2"));
    }
    Ok((n, cap, scale))
}

/// Builds one of the adversarial fixtures, with ε = 1 tick.
pub fn gen_example(name: &str, params: ExampleParams) -> Result<Instance, GenError> {
    let (n, cap, scale) = resolve(name, params)?;
    let ring: Vec<u32> = (1..=n).collect();
    let unit = vec![scale; n as usize];
    let c = Tick::from(n) * scale;
    match name {
        "ex1_sir_length" => {
            let mut reqs = Vec::new();
            for seg in 0..n {
                for j in 0..cap {
                    let i = seg * cap + j;
                    reqs.push(pdp(i, Tick::from(i) * c, seg + 1, (seg + 1) % n + 1, 1));
                }
            }
            let w = world(Layout::Circuit, &ring, &unit, &no_label)?;
            single_vehicle(w, cap, reqs, Scenario::Other, Objective::TotalTourLength)
        }
        "ex2_sir_makespan" => {
            let reqs = vec![pdp(0, 0, 1, n, 1), pdp(1, 1, 1, n, 1)];
            let w = world(Layout::Circuit, &ring, &unit, &parking_first)?;
            single_vehicle(w, cap, reqs, Scenario::Morning, Objective::Makespan)
        }
        "ex3_sife_makespan" => {
            let reqs = vec![pdp(0, Tick::from(n - 1) * scale, n, 1, cap)];
            let w = world(Layout::Circuit, &ring, &unit, &parking_first)?;
            single_vehicle(w, cap, reqs, Scenario::Evening, Objective::Makespan)
        }
        "ex4_sifm_makespan" => {
            let reqs = vec![pdp(0, 0, 1, n, 1), pdp(1, c, 1, n, cap - 1), pdp(2, c, 1, n, 1)];
            let w = world(Layout::Circuit, &ring, &unit, &parking_first)?;
            single_vehicle(w, cap, reqs, Scenario::Morning, Objective::Makespan)
        }
        "ex5_main_makespan" => {
            let stations: Vec<u32> = (0..=n).collect();
            let reqs = vec![pdp(0, 0, 0, n, 1), pdp(1, 1, 0, n, 1)];
            let w = world(Layout::Line, &stations, &unit, &parking_zero)?;
            single_vehicle(w, cap, reqs, Scenario::Morning, Objective::Makespan)
        }
        "main_length_lb" => {
            // Cap single requests v_i -> v_{i-1} per i; each is released when
            // MAIN is back at v_1 from serving the previous one
            let mut reqs = Vec::new();
            let mut t = 0;
            for i in 2..=n {
                for _ in 0..cap {
                    let id = reqs.len() as u32;
                    reqs.push(pdp(id, t, i, i - 1, 1));
                    t += 2 * Tick::from(i - 1) * scale;
                }
            }
            let unit = vec![scale; ring.len() - 1];
            let w = world(Layout::Line, &ring, &unit, &no_label)?;
            single_vehicle(w, cap, reqs, Scenario::Other, Objective::TotalTourLength)
        }
        other => Err(GenError::UnknownGenerator(other.to_string())),
    }
}

/// Costs each fixture is built to force.
pub fn expected(name: &str, params: ExampleParams) -> Result<Expected, GenError> {
    let (n, cap, scale) = resolve(name, params)?;
    let (n64, cap64) = (Tick::from(n), Tick::from(cap));
    let c = n64 * scale;
    Ok(match name {
        "ex1_sir_length" => Expected {
            policy: "sir",
            objective: Objective::TotalTourLength,
            alg: cap64 * c * c,
            opt: Some(c),
        },
        "ex2_sir_makespan" => Expected {
            policy: "sir",
            objective: Objective::Makespan,
            alg: 2 * c,
            opt: Some(c + 1),
        },
        "ex3_sife_makespan" => Expected {
            policy: "sif_e",
            objective: Objective::Makespan,
            alg: (2 * n64 - 1) * scale,
            opt: Some(c),
        },
        "ex4_sifm_makespan" => Expected {
            policy: "sif_m",
            objective: Objective::Makespan,
            alg: 3 * c,
            opt: Some(2 * c),
        },
        "ex5_main_makespan" => Expected {
            policy: "main",
            objective: Objective::Makespan,
            alg: 4 * c,
            opt: Some(2 * c + 1),
        },
        _ => Expected {
            policy: "main",
            objective: Objective::TotalTourLength,
            alg: n64 * (n64 - 1) * cap64 * scale,
            opt: None,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub n: u32,
    pub requests: u32,
    pub cap: u32,
    pub layout: Layout,
    /// Edge lengths are drawn from `1..=max_edge`.
    pub max_edge: Tick,
    /// Releases are drawn from `0..=horizon`; defaults to ten times the subnetwork length.
    pub horizon: Option<Tick>,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            n: 5,
            requests: 6,
            cap: 2,
            layout: Layout::Circuit,
            max_edge: 1,
            horizon: None,
        }
    }
}

/// Seeded random instance of a period; the same seed yields the same instance.
pub fn gen_scenario(scenario: Scenario, seed: u64, p: &ScenarioParams) -> Result<Instance, GenError> {
    let min_n = match p.layout {
        Layout::Circuit => 3,
        Layout::Line => 2,
    };
    if p.n < min_n || p.cap == 0 || p.max_edge == 0 {
        return Err(bad(format!("need n >= {min_n}, cap >= 1, max_edge >= 1")));
    }
    if scenario == Scenario::Lunch && (p.layout == Layout::Circuit || p.n < 3) {
        return Err(bad("lunch instances run on a line of at least 3 stations"));
    }
    if scenario == Scenario::Emergency {
        return Err(bad("emergency requests are not generated"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.n;
    let stations: Vec<u32> = (1..=n).collect();
    let hops = match p.layout {
        Layout::Circuit => n as usize,
        Layout::Line => n as usize - 1,
    };
    let lengths: Vec<Tick> = (0..hops).map(|_| rng.gen_range(1..=p.max_edge)).collect();
    let restaurant = n.div_ceil(2);
    let labels = move |id: u32| -> Option<&'static str> {
        match scenario {
            Scenario::Morning | Scenario::Evening => parking_first(id),
            Scenario::Lunch => Some(if id == restaurant { "restaurant" } else { "building" }),
            _ => None,
        }
    };
    let (net, sub) = world(p.layout, &stations, &lengths, &labels)?;
    let horizon = p.horizon.unwrap_or(10 * sub.length());
    let mut reqs = Vec::new();
    for id in 0..p.requests {
        let t = rng.gen_range(0..=horizon);
        let other = |rng: &mut ChaCha8Rng, not: u32| loop {
            let s = rng.gen_range(1..=n);
            if s != not {
                break s;
            }
        };
        let (x, y, z) = match scenario {
            Scenario::Morning => (1, rng.gen_range(2..=n), 1),
            Scenario::Evening => (rng.gen_range(2..=n), 1, 1),
            Scenario::Lunch => {
                let b = other(&mut rng, restaurant);
                let z = rng.gen_range(1..=p.cap);
                if rng.gen_bool(0.5) {
                    (b, restaurant, z)
                } else {
                    (restaurant, b, z)
                }
            }
            _ => {
                let x = rng.gen_range(1..=n);
                (x, other(&mut rng, x), rng.gen_range(1..=p.cap))
            }
        };
        reqs.push(pdp(id, t, x, y, z));
    }
    single_vehicle((net, sub), p.cap, reqs, scenario, Objective::TotalTourLength)
}

/// Generator names understood by [`generate`].
pub fn scenario_generator(name: &str) -> Option<Scenario> {
    match name {
        "morning" => Some(Scenario::Morning),
        "evening" => Some(Scenario::Evening),
        "lunch" => Some(Scenario::Lunch),
        "other" => Some(Scenario::Other),
        _ => None,
    }
}
