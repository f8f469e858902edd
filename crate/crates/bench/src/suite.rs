//! Bound-checking suites: expand a config into cases, evaluate every
//! (case, policy) row against the oracle and report exact ratios.
//!
//! ```toml
//! [[group]]
//! name = "sif_m_morning"
//! generator = "morning"
//! layout = "circuit"
//! policies = ["sif_m"]
//! objective = "length"
//! bound = "1"
//! seeds = 200
//! n = [3, 6]
//! requests = [1, 8]
//! cap = [1, 3]
//! max_edge = 2
//! ```
//!
//! `bound` is `"cap"`, `"cap_stations"` (Cap times the number of stations on
//! the subnetwork), a fraction such as `"3/2"`, or absent for no bound.
//! Fixture generators (`ex1_sir_length`, ...) ignore seeds and take `n`,
//! `cap` and `scale` as single values.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use shuttle_core::algorithms::PolicyKind;
use shuttle_core::engine::{audit_non_clairvoyance, replay, run_online};
use shuttle_core::oracle::opt_cost;
use shuttle_core::schedule::{cost, validate_schedule, ValidationOptions};
use shuttle_core::{Instance, Objective, Tick};
use thiserror::Error;

use crate::gen::{gen_example, gen_scenario, scenario_generator, ExampleParams, GenError, Layout, ScenarioParams};

#[derive(Debug, Error)]
pub enum SuiteError {
    #[error("bad suite config: {0}")]
    Config(String),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
    #[error("group {group}: {source}")]
    Gen { group: String, source: GenError },
}

/// Competitive bound a group is checked against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bound {
    Fixed(Ratio<u64>),
    Cap,
    CapStations,
}

impl Bound {
    pub fn resolve(self, inst: &Instance) -> Ratio<u64> {
        let cap = u64::from(inst.capacity());
        match self {
            Bound::Fixed(r) => r,
            Bound::Cap => Ratio::from_integer(cap),
            Bound::CapStations => {
                let stations = inst.subnetworks()[0].stations().len() as u64;
                Ratio::from_integer(cap * stations)
            }
        }
    }
}

impl FromStr for Bound {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cap" => Ok(Bound::Cap),
            "cap_stations" => Ok(Bound::CapStations),
            _ => {
                let parse = |x: &str| x.trim().parse::<u64>().map_err(|e| format!("bound {s:?}: {e}"));
                let r = match s.split_once('/') {
                    Some((a, b)) => {
                        let den = parse(b)?;
                        if den == 0 {
                            return Err(format!("bound {s:?} has a zero denominator"));
                        }
                        Ratio::new(parse(a)?, den)
                    }
                    None => Ratio::from_integer(parse(s)?),
                };
                Ok(Bound::Fixed(r))
            }
        }
    }
}

/// Inclusive range written as a single value or `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum Span {
    One(u32),
    Range([u32; 2]),
}

impl Span {
    fn bounds(self) -> (u32, u32) {
        match self {
            Span::One(v) => (v, v),
            Span::Range([a, b]) => (a.min(b), a.max(b)),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupConfig {
    pub name: String,
    pub generator: String,
    #[serde(default)]
    pub layout: Option<Layout>,
    pub policies: Vec<String>,
    pub objective: String,
    #[serde(default)]
    pub bound: Option<String>,
    #[serde(default = "default_seeds")]
    pub seeds: u64,
    #[serde(default)]
    pub first_seed: u64,
    #[serde(default)]
    pub n: Option<Span>,
    #[serde(default)]
    pub requests: Option<Span>,
    #[serde(default)]
    pub cap: Option<Span>,
    #[serde(default)]
    pub scale: Option<Tick>,
    #[serde(default)]
    pub max_edge: Option<Tick>,
    #[serde(default)]
    pub horizon: Option<Tick>,
}

fn default_seeds() -> u64 {
    200
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    #[serde(rename = "group")]
    pub groups: Vec<GroupConfig>,
}

impl SuiteConfig {
    pub fn parse(text: &str) -> Result<Self, SuiteError> {
        Ok(toml::from_str(text)?)
    }
}

/// One generated instance and the policies to run on it.
#[derive(Clone, Debug)]
pub struct Case {
    pub id: String,
    pub group: String,
    pub generator: String,
    pub seed: Option<u64>,
    pub instance: Instance,
    pub policies: Vec<PolicyKind>,
    pub objective: Objective,
    pub bound: Option<Bound>,
}

fn config_err(group: &str, msg: impl fmt::Display) -> SuiteError {
    SuiteError::Config(format!("group {group}: {msg}"))
}

/// Expands every group into its cases, in config order.
pub fn expand(config: &SuiteConfig) -> Result<Vec<Case>, SuiteError> {
    let mut cases = Vec::new();
    for g in &config.groups {
        let policies = g
            .policies
            .iter()
            .map(|p| PolicyKind::parse(p).map_err(|e| config_err(&g.name, e)))
            .collect::<Result<Vec<_>, _>>()?;
        let objective =
            Objective::parse(&g.objective).ok_or_else(|| config_err(&g.name, format!("objective {:?}", g.objective)))?;
        let bound = g
            .bound
            .as_deref()
            .map(str::parse::<Bound>)
            .transpose()
            .map_err(|e| config_err(&g.name, e))?;
        let gen_err = |source| SuiteError::Gen {
            group: g.name.clone(),
            source,
        };
        let case = |id: String, seed, instance| Case {
            id,
            group: g.name.clone(),
            generator: g.generator.clone(),
            seed,
            instance,
            policies: policies.clone(),
            objective,
            bound,
        };
        match scenario_generator(&g.generator) {
            Some(scenario) => {
                let width = (g.first_seed + g.seeds.max(1) - 1).to_string().len().max(3);
                for seed in g.first_seed..g.first_seed + g.seeds {
                    let p = draw_params(g, seed);
                    let inst = gen_scenario(scenario, seed, &p).map_err(gen_err)?;
                    cases.push(case(format!("{}-{seed:0width$}", g.name), Some(seed), inst));
                }
            }
            None => {
                let single = |s: Option<Span>| -> Result<Option<u32>, SuiteError> {
                    match s {
                        None => Ok(None),
                        Some(Span::One(v)) => Ok(Some(v)),
                        Some(Span::Range(_)) => Err(config_err(&g.name, "fixtures take single values")),
                    }
                };
                let params = ExampleParams {
                    n: single(g.n)?,
                    cap: single(g.cap)?,
                    scale: g.scale,
                };
                let inst = gen_example(&g.generator, params).map_err(gen_err)?;
                cases.push(case(g.name.clone(), None, inst));
            }
        }
    }
    Ok(cases)
}

/// Instance sizes for one seed, drawn from a stream separate from the instance itself.
fn draw_params(g: &GroupConfig, seed: u64) -> ScenarioParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut pick = |s: Option<Span>, default: (u32, u32)| {
        let (lo, hi) = s.map_or(default, Span::bounds);
        rng.gen_range(lo..=hi)
    };
    let layout = g.layout.unwrap_or(Layout::Circuit);
    let min_n = if layout == Layout::Line { 2 } else { 3 };
    ScenarioParams {
        n: pick(g.n, (min_n, 6)),
        requests: pick(g.requests, (1, 8)),
        cap: pick(g.cap, (1, 3)),
        layout,
        max_edge: g.max_edge.unwrap_or(1),
        horizon: g.horizon,
    }
}

/// Side checks made while evaluating a row; all must hold on a healthy run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Checks {
    /// A second run produced the identical trace.
    pub deterministic: bool,
    /// Replaying the trace rebuilt the identical schedule.
    pub replayed: bool,
    /// No query saw a request before its release.
    pub audited: bool,
    /// The oracle witness validated with zero violations and has the reported cost.
    pub witness_valid: bool,
    /// The oracle cost is at most the cost of every policy that accepts the instance.
    pub oracle_dominates: bool,
}

impl Checks {
    pub fn all(&self) -> bool {
        self.deterministic && self.replayed && self.audited && self.witness_valid && self.oracle_dominates
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub instance_id: String,
    pub generator: String,
    pub seed: Option<u64>,
    pub policy: String,
    pub objective: String,
    pub alg_cost: Option<Tick>,
    pub opt_cost: Option<Tick>,
    pub ratio_num: Option<u64>,
    pub ratio_den: Option<u64>,
    pub bound_num: Option<u64>,
    pub bound_den: Option<u64>,
    /// `None` when there is no bound to check or the row failed.
    pub satisfied: Option<bool>,
    pub checks: Checks,
    pub error: Option<String>,
}

impl Row {
    pub fn ratio(&self) -> Option<Ratio<u64>> {
        Some(Ratio::new(self.ratio_num?, self.ratio_den?))
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RatioReport {
    pub rows: Vec<Row>,
}

impl RatioReport {
    pub fn violations(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.satisfied == Some(false))
    }

    pub fn failures(&self) -> impl Iterator<Item = &Row> {
        self.rows.iter().filter(|r| r.error.is_some() || !r.checks.all())
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).unwrap();
        let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.instance_id.clone(),
                r.generator.clone(),
                opt(r.seed),
                r.policy.clone(),
                r.objective.clone(),
                opt(r.alg_cost),
                opt(r.opt_cost),
                opt(r.ratio_num),
                opt(r.ratio_den),
                opt(r.bound_num),
                opt(r.bound_den),
                r.satisfied.map(|b| b.to_string()).unwrap_or_default(),
            ])
            .unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap()
    }
}

pub const CSV_COLUMNS: [&str; 12] = [
    "instance_id",
    "generator",
    "seed",
    "policy",
    "objective",
    "alg_cost",
    "opt_cost",
    "ratio_num",
    "ratio_den",
    "bound_num",
    "bound_den",
    "satisfied",
];

/// Evaluates one policy on one case; errors land in the row.
pub fn evaluate(case: &Case, policy: PolicyKind) -> Row {
    let mut row = Row {
        instance_id: case.id.clone(),
        generator: case.generator.clone(),
        seed: case.seed,
        policy: policy.name().to_string(),
        objective: case.objective.as_str().to_string(),
        alg_cost: None,
        opt_cost: None,
        ratio_num: None,
        ratio_den: None,
        bound_num: None,
        bound_den: None,
        satisfied: None,
        checks: Checks::default(),
        error: None,
    };
    if let Err(e) = fill(&mut row, case, policy) {
        row.error = Some(e);
    }
    row
}

fn fill(row: &mut Row, case: &Case, policy: PolicyKind) -> Result<(), String> {
    let inst = &case.instance;
    let objective = case.objective;
    let online = run_online(inst, &policy).map_err(|e| format!("simulation: {e}"))?;
    let again = run_online(inst, &policy).map_err(|e| format!("second simulation: {e}"))?;
    row.checks.deterministic = again.trace == online.trace;
    row.checks.replayed = replay(&online.trace, inst).is_ok_and(|s| s == online.schedule);
    row.checks.audited = audit_non_clairvoyance(&online.trace, inst).is_ok();
    let alg = cost(&online.schedule, objective);
    row.alg_cost = Some(alg);

    let opt = opt_cost(inst, objective).map_err(|e| format!("oracle: {e}"))?;
    row.opt_cost = Some(opt.cost);
    row.checks.witness_valid = validate_schedule(&opt.schedule, inst, ValidationOptions::default()).is_empty()
        && cost(&opt.schedule, objective) == opt.cost;
    row.checks.oracle_dominates = PolicyKind::ALL.iter().all(|&p| match run_online(inst, &p) {
        Ok(out) => opt.cost <= cost(&out.schedule, objective),
        Err(_) => true,
    });
    if opt.cost == 0 {
        return Err(format!("optimum is zero (online cost {alg})"));
    }
    let ratio = Ratio::new(alg, opt.cost);
    row.ratio_num = Some(*ratio.numer());
    row.ratio_den = Some(*ratio.denom());
    if let Some(bound) = case.bound {
        let b = bound.resolve(inst);
        row.bound_num = Some(*b.numer());
        row.bound_den = Some(*b.denom());
        row.satisfied = Some(ratio <= b);
    }
    Ok(())
}

/// Evaluates every (case, policy) row in parallel; rows come back sorted by
/// instance id, then policy, then objective.
pub fn run_cases(cases: &[Case]) -> RatioReport {
    let jobs: Vec<(&Case, PolicyKind)> = cases.iter().flat_map(|c| c.policies.iter().map(move |&p| (c, p))).collect();
    let mut rows: Vec<Row> = jobs.par_iter().map(|&(c, p)| evaluate(c, p)).collect();
    rows.sort_by(|a, b| {
        (&a.instance_id, &a.policy, &a.objective).cmp(&(&b.instance_id, &b.policy, &b.objective))
    });
    RatioReport { rows }
}

pub fn run_suite(config: &SuiteConfig) -> Result<RatioReport, SuiteError> {
    Ok(run_cases(&expand(config)?))
}
