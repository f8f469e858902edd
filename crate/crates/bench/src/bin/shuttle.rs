use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use shuttle_bench::gen::{gen_example, gen_scenario, scenario_generator, ExampleParams, Layout, ScenarioParams};
use shuttle_bench::suite::{run_suite, SuiteConfig};
use shuttle_core::algorithms::PolicyKind;
use shuttle_core::engine::run_online;
use shuttle_core::format::{instance_to_json, parse_instance};
use shuttle_core::oracle::opt_cost;
use shuttle_core::partition::validate_partition;
use shuttle_core::schedule::cost;
use shuttle_core::{Instance, Objective, Tick};

const VALIDATION: u8 = 1;
const BOUND: u8 = 2;
const IO: u8 = 3;

#[derive(Parser)]
#[command(name = "shuttle", version, about = "Online shuttle dispatch: generate, simulate, solve and check bounds")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a fixture (ex1_sir_length, ...) or a seeded scenario (morning, evening, lunch, other).
    Gen(GenArgs),
    /// Check an instance file and its subnetwork partition.
    Validate { instance: PathBuf },
    /// Run a policy and write the schedule dump.
    Simulate {
        instance: PathBuf,
        #[arg(long)]
        policy: String,
        #[arg(long)]
        out: PathBuf,
        /// Also write the event trace.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Exact offline optimum.
    Opt {
        instance: PathBuf,
        /// Defaults to the instance's objective.
        #[arg(long)]
        objective: Option<String>,
    },
    /// Online cost over the optimum, as an exact fraction.
    Ratio {
        instance: PathBuf,
        #[arg(long)]
        policy: String,
        #[arg(long)]
        objective: Option<String>,
    },
    /// Evaluate a suite config and write the CSV report.
    Suite {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenArgs {
    name: String,
    #[arg(short, long)]
    o: PathBuf,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    cap: Option<u32>,
    #[arg(long)]
    scale: Option<Tick>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    requests: Option<u32>,
    #[arg(long)]
    layout: Option<String>,
    #[arg(long)]
    max_edge: Option<Tick>,
    #[arg(long)]
    horizon: Option<Tick>,
}

struct Failure(u8, String);

fn io(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure(IO, format!("{}: {e}", path.display()))
}

fn read_instance(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| io(path, e))?;
    parse_instance(&text).map_err(|e| io(path, e))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io(path, e))
}

fn objective(inst: &Instance, name: Option<&str>) -> Result<Objective, Failure> {
    match name {
        None => Ok(inst.objective),
        Some(s) => Objective::parse(s).ok_or_else(|| Failure(IO, format!("unknown objective {s:?}"))),
    }
}

fn policy(name: &str) -> Result<PolicyKind, Failure> {
    PolicyKind::parse(name).map_err(|e| Failure(IO, e.to_string()))
}

fn gen(a: &GenArgs) -> Result<(), Failure> {
    let bad = |e: shuttle_bench::gen::GenError| Failure(IO, e.to_string());
    let inst = match scenario_generator(&a.name) {
        Some(scenario) => {
            let d = ScenarioParams::default();
            let layout = match a.layout.as_deref() {
                None => d.layout,
                Some(s) => Layout::parse(s).ok_or_else(|| Failure(IO, format!("unknown layout {s:?}")))?,
            };
            let p = ScenarioParams {
                n: a.n.unwrap_or(d.n),
                requests: a.requests.unwrap_or(d.requests),
                cap: a.cap.unwrap_or(d.cap),
                layout,
                max_edge: a.max_edge.unwrap_or(d.max_edge),
                horizon: a.horizon,
            };
            gen_scenario(scenario, a.seed, &p).map_err(bad)?
        }
        None => gen_example(
            &a.name,
            ExampleParams {
                n: a.n,
                cap: a.cap,
                scale: a.scale,
            },
        )
        .map_err(bad)?,
    };
    write(&a.o, &instance_to_json(&inst))
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Gen(a) => gen(&a),
        Cmd::Validate { instance } => {
            let inst = read_instance(&instance)?;
            let violations = validate_partition(inst.network(), inst.subnetworks(), inst.scenario)
                .map_err(|e| Failure(VALIDATION, e.to_string()))?;
            if violations.is_empty() {
                println!("ok: {} requests, {} subnetworks", inst.requests().len(), inst.subnetworks().len());
                Ok(())
            } else {
                for v in &violations {
                    println!("{v}");
                }
                Err(Failure(VALIDATION, format!("{} partition violations", violations.len())))
            }
        }
        Cmd::Simulate {
            instance,
            policy: p,
            out,
            trace,
        } => {
            let inst = read_instance(&instance)?;
            let online = run_online(&inst, &policy(&p)?).map_err(|e| Failure(VALIDATION, e.to_string()))?;
            write(&out, &online.schedule.dump())?;
            if let Some(path) = trace {
                write(&path, &online.trace.dump(&inst))?;
            }
            println!("{} {}", inst.objective.as_str(), cost(&online.schedule, inst.objective));
            Ok(())
        }
        Cmd::Opt { instance, objective: o } => {
            let inst = read_instance(&instance)?;
            let o = objective(&inst, o.as_deref())?;
            let r = opt_cost(&inst, o).map_err(|e| Failure(VALIDATION, e.to_string()))?;
            println!("{} {}", o.as_str(), r.cost);
            Ok(())
        }
        Cmd::Ratio {
            instance,
            policy: p,
            objective: o,
        } => {
            let inst = read_instance(&instance)?;
            let o = objective(&inst, o.as_deref())?;
            let online = run_online(&inst, &policy(&p)?).map_err(|e| Failure(VALIDATION, e.to_string()))?;
            let alg = cost(&online.schedule, o);
            let opt = opt_cost(&inst, o).map_err(|e| Failure(VALIDATION, e.to_string()))?.cost;
            if opt == 0 {
                return Err(Failure(VALIDATION, format!("optimum is zero (online cost {alg})")));
            }
            let r = Ratio::new(alg, opt);
            println!("alg {alg} opt {opt} ratio {}/{}", r.numer(), r.denom());
            Ok(())
        }
        Cmd::Suite { config, csv, json } => {
            let text = fs::read_to_string(&config).map_err(|e| io(&config, e))?;
            let cfg = SuiteConfig::parse(&text).map_err(|e| io(&config, e))?;
            let report = run_suite(&cfg).map_err(|e| io(&config, e))?;
            write(&csv, &report.to_csv())?;
            if let Some(path) = json {
                write(&path, &report.to_json())?;
            }
            for r in report.failures() {
                eprintln!("{} {}: {}", r.instance_id, r.policy, r.error.as_deref().unwrap_or("side check failed"));
            }
            let violations = report.violations().count();
            let failures = report.failures().count();
            println!("{} rows, {violations} bound violations, {failures} failed rows", report.rows.len());
            if violations > 0 {
                Err(Failure(BOUND, format!("{violations} rows exceed their bound")))
            } else if failures > 0 {
                Err(Failure(VALIDATION, format!("{failures} rows failed")))
            } else {
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(IO);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
