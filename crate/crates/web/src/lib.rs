//! Browser bindings for the demo page in `www/`.
//!
//! Every export takes and returns JSON text. The `*_json` functions hold the
//! logic and run natively; the `#[wasm_bindgen]` wrappers only turn errors into
//! JavaScript exceptions.
//!
//! Diagrams are drawn against the first vehicle's subnetwork: the vertical
//! axis is the distance from its origin, the horizontal axis is time.

use num_rational::Ratio;
use serde_json::{json, Value};
use shuttle_bench::gen::{gen_example, gen_scenario, scenario_generator, ExampleParams, Layout, ScenarioParams};
use shuttle_core::algorithms::PolicyKind;
use shuttle_core::engine::run_online;
use shuttle_core::format::{instance_to_json, parse_instance};
use shuttle_core::oracle::opt_cost;
use shuttle_core::schedule::{cost, makespan, total_length, Schedule};
use shuttle_core::{Instance, Objective, SubnetworkKind, Tick, VehicleId};
use wasm_bindgen::prelude::*;

fn nonzero<T: Default + PartialEq>(v: T) -> Option<T> {
    (v != T::default()).then_some(v)
}

/// Fixture or seeded scenario as an instance document; zero means "default".
pub fn generate_json(name: &str, n: u32, cap: u32, scale: Tick, seed: u64) -> Result<String, String> {
    let inst = match scenario_generator(name) {
        Some(scenario) => {
            let d = ScenarioParams::default();
            let p = ScenarioParams {
                n: nonzero(n).unwrap_or(d.n),
                cap: nonzero(cap).unwrap_or(d.cap),
                layout: if name == "lunch" { Layout::Line } else { d.layout },
                ..d
            };
            gen_scenario(scenario, seed, &p)
        }
        None => gen_example(
            name,
            ExampleParams {
                n: nonzero(n),
                cap: nonzero(cap),
                scale: nonzero(scale),
            },
        ),
    }
    .map_err(|e| e.to_string())?;
    Ok(instance_to_json(&inst))
}

fn diagram(inst: &Instance, schedule: &Schedule) -> Value {
    let sub = &inst.subnetworks()[0];
    let circuit = sub.kind() == SubnetworkKind::Circuit;
    let offset = |v: VehicleId, s| inst.vehicle_subnetwork(v).offset_from_origin(s).unwrap_or(0);
    let stations: Vec<Value> = sub
        .stations()
        .iter()
        .map(|&s| json!({"id": s.0, "offset": offset(VehicleId(0), s), "label": inst.network().label(s)}))
        .collect();
    let requests: Vec<Value> = inst
        .rides()
        .iter()
        .map(|r| {
            json!({"id": r.id.0, "release": r.release, "origin": offset(VehicleId(0), r.origin),
                   "destination": offset(VehicleId(0), r.destination), "load": r.load})
        })
        .collect();
    let vehicles: Vec<Value> = schedule
        .tours
        .iter()
        .map(|tour| {
            let v = tour.vehicle;
            let own = inst.vehicle_subnetwork(v);
            let mut lines: Vec<Vec<[Tick; 2]>> = vec![Vec::new()];
            for m in &tour.moves {
                let mut t = m.departure;
                lines.last_mut().unwrap().push([t, offset(v, m.origin)]);
                for hop in m.path.windows(2) {
                    t += own.step_length(hop[0], hop[1]).unwrap_or(0);
                    let (a, b) = (offset(v, hop[0]), offset(v, hop[1]));
                    if circuit && b < a {
                        // wrap past the origin: finish at the top, restart at the bottom
                        lines.last_mut().unwrap().push([t, own.length()]);
                        lines.push(vec![[t, 0]]);
                    } else {
                        lines.last_mut().unwrap().push([t, b]);
                    }
                }
                lines.last_mut().unwrap().push([m.arrival, offset(v, m.destination)]);
            }
            let actions: Vec<Value> = tour
                .actions
                .iter()
                .filter(|a| !a.served.is_empty())
                .map(|a| {
                    json!({"time": a.time, "offset": offset(v, a.station), "delta": a.delta,
                           "served": a.served.iter().map(|(r, _)| r.0).collect::<Vec<_>>()})
                })
                .collect();
            json!({"vehicle": v.0, "lines": lines, "actions": actions})
        })
        .collect();
    json!({
        "kind": if circuit { "circuit" } else { "line" },
        "length": sub.length(),
        "stations": stations,
        "requests": requests,
        "vehicles": vehicles,
        "total_length": total_length(schedule),
        "makespan": makespan(schedule),
    })
}

fn load(instance: &str) -> Result<Instance, String> {
    parse_instance(instance).map_err(|e| e.to_string())
}

/// Runs a policy and returns its time-space diagram and costs.
pub fn simulate_json(instance: &str, policy: &str) -> Result<String, String> {
    let inst = load(instance)?;
    let p = PolicyKind::parse(policy).map_err(|e| e.to_string())?;
    let out = run_online(&inst, &p).map_err(|e| e.to_string())?;
    Ok(json!({"policy": p.name(), "diagram": diagram(&inst, &out.schedule)}).to_string())
}

/// Online cost against the exact optimum, with both diagrams.
pub fn ratio_json(instance: &str, policy: &str, objective: &str) -> Result<String, String> {
    let inst = load(instance)?;
    let p = PolicyKind::parse(policy).map_err(|e| e.to_string())?;
    let o = Objective::parse(objective).ok_or_else(|| format!("unknown objective {objective:?}"))?;
    let out = run_online(&inst, &p).map_err(|e| e.to_string())?;
    let opt = opt_cost(&inst, o).map_err(|e| e.to_string())?;
    let alg = cost(&out.schedule, o);
    if opt.cost == 0 {
        return Err(format!("optimum is zero (online cost {alg})"));
    }
    let r = Ratio::new(alg, opt.cost);
    Ok(json!({
        "policy": p.name(),
        "objective": o.as_str(),
        "alg": alg,
        "opt": opt.cost,
        "ratio": [r.numer(), r.denom()],
        "online": diagram(&inst, &out.schedule),
        "offline": diagram(&inst, &opt.schedule),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn generate(name: &str, n: u32, cap: u32, scale: u32, seed: u32) -> Result<String, JsValue> {
    generate_json(name, n, cap, Tick::from(scale), u64::from(seed)).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn simulate(instance: &str, policy: &str) -> Result<String, JsValue> {
    simulate_json(instance, policy).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn ratio(instance: &str, policy: &str, objective: &str) -> Result<String, JsValue> {
    ratio_json(instance, policy, objective).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn example_ratio_round_trip() {
        let inst = generate_json("ex2_sir_makespan", 0, 0, 0, 0).unwrap();
        let r = parse(&ratio_json(&inst, "sir", "makespan").unwrap());
        assert_eq!((r["alg"].as_u64(), r["opt"].as_u64()), (Some(16), Some(9)));
        assert_eq!(r["ratio"], json!([16, 9]));
        assert_eq!(r["offline"]["makespan"], 9);
    }

    #[test]
    fn circuit_lines_wrap_at_the_origin() {
        let inst = generate_json("ex1_sir_length", 0, 0, 0, 0).unwrap();
        let d = &parse(&simulate_json(&inst, "sir").unwrap())["diagram"];
        assert_eq!(d["total_length"], 48);
        let lines = d["vehicles"][0]["lines"].as_array().unwrap();
        // one segment per full round plus the final stretch at the depot
        assert_eq!(lines.len(), 13);
        for line in lines {
            let pts = line.as_array().unwrap();
            for w in pts.windows(2) {
                assert!(w[0][0].as_u64() <= w[1][0].as_u64());
                assert!(w[1][1].as_u64().unwrap() <= 4);
            }
        }
    }

    #[test]
    fn errors_come_back_as_text() {
        assert!(generate_json("ex9", 0, 0, 0, 0).unwrap_err().contains("ex9"));
        let inst = generate_json("morning", 4, 2, 0, 3).unwrap();
        assert!(simulate_json(&inst, "fastest").is_err());
        assert!(simulate_json("{", "sir").is_err());
        assert!(ratio_json(&inst, "sif_m", "speed").is_err());
        let lunch = generate_json("lunch", 5, 2, 0, 1).unwrap();
        assert!(parse(&simulate_json(&lunch, "main").unwrap())["diagram"]["kind"] == "line");
    }
}
