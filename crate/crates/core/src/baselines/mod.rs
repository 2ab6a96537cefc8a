//! Reference scheduling methods and a uniform dispatcher over all methods.

mod ga;

pub use ga::{ga, ga_from, GaConfig, GaReport};

use std::time::Instant;

use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::altermilp::{self, random_init, Ablation, AlterMilpConfig, OptimizationTrace};
use crate::environment::GridEnvironment;
use crate::error::{Error, Result};
use crate::evaluator::{evaluate, exec_time, makespan_of};
use crate::model::{build_fixed_x, build_fixed_yz, MilpModel};
use crate::schedule::Schedule;
use crate::solver::{self, SolveOptions, SolveRecord, SolveStatus};

/// The method random initialisation stands in for.
pub fn random_baseline(env: &GridEnvironment, seed: u64) -> Schedule {
    random_init(env, seed)
}

/// Result of a MILP-backed baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedSolve {
    pub schedule: Schedule,
    pub status: SolveStatus,
    /// The solve failed and `schedule` is the random starting point.
    pub degraded: bool,
    pub record: Option<SolveRecord>,
}

fn solve_restricted(env: &GridEnvironment, start: Schedule, model: Result<MilpModel>, budget: f64) -> Result<RestrictedSolve> {
    let model = model?;
    let result = solver::solve(&model, &SolveOptions::budget(budget))?;
    let record = Some(result.record(&model));
    if result.status.has_solution() {
        if let Ok(schedule) = model.decode_schedule(env, &result.assignment) {
            if makespan_of(env, &schedule) <= makespan_of(env, &start) {
                return Ok(RestrictedSolve {
                    schedule,
                    status: result.status,
                    degraded: false,
                    record,
                });
            }
        }
    }
    Ok(RestrictedSolve {
        schedule: start,
        status: result.status,
        degraded: !result.status.has_solution(),
        record,
    })
}

/// Random job assignment and order; data placement optimised by MILP.
pub fn min_trans(env: &GridEnvironment, budget: f64, seed: u64) -> Result<RestrictedSolve> {
    let start = random_init(env, seed);
    let model = build_fixed_x(env, &start.job_assignment, Some((&start.priority, &start.data_assignment)))
        .and_then(|mut m| {
            m.fix_priority(&start.priority)?;
            // Bounds changed under the warm start: re-check it.
            m.warm_start_with(env, &start);
            Ok(m)
        });
    solve_restricted(env, start, model, budget)
}

/// Random order and data placement; job assignment optimised by MILP.
pub fn min_exe(env: &GridEnvironment, budget: f64, seed: u64) -> Result<RestrictedSolve> {
    let start = random_init(env, seed);
    let model = build_fixed_yz(env, &start.priority, &start.data_assignment, Some(&start.job_assignment));
    solve_restricted(env, start, model, budget)
}

/// Per object, the local SN minimising staging plus the mean LAN delay.
pub fn greedy_data_assignment(env: &GridEnvironment) -> Vec<usize> {
    let cns = env.num_cns() as f64;
    (0..env.num_objects())
        .map(|d| {
            let cost = |l: usize| {
                env.td_remote(d, l) + (0..env.num_cns()).map(|c| env.td_local(d, l, c)).sum::<f64>() / cns
            };
            (0..env.num_local_sns())
                .min_by(|&a, &b| cost(a).total_cmp(&cost(b)).then(a.cmp(&b)))
                .unwrap()
        })
        .collect()
}

/// Incremental replay used by the constructive heuristics.
struct Simulator<'a> {
    env: &'a GridEnvironment,
    staged: Vec<f64>,
    data: &'a [usize],
    cn_free: Vec<f64>,
}

impl<'a> Simulator<'a> {
    fn new(env: &'a GridEnvironment, data: &'a [usize]) -> Self {
        Simulator {
            env,
            staged: (0..env.num_objects()).map(|d| env.td_remote(d, data[d])).collect(),
            data,
            cn_free: vec![0.0; env.num_cns()],
        }
    }

    /// When `job` could begin executing on `cn` if queued now.
    fn ready(&self, job: usize, cn: usize) -> f64 {
        let u = self.cn_free[cn];
        self.env
            .job_inputs(job)
            .iter()
            .map(|&d| u.max(self.staged[d]) + self.env.td_local(d, self.data[d], cn))
            .fold(u, f64::max)
    }

    fn place(&mut self, job: usize, cn: usize) {
        self.cn_free[cn] = self.ready(job, cn) + exec_time(self.env, job, cn);
    }
}

fn argmin(n: usize, key: impl Fn(usize) -> f64) -> usize {
    (0..n).min_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b))).unwrap()
}

/// Jobs in `order` (submission order by default), each sent to the CN that
/// frees up first.
pub fn greedy(env: &GridEnvironment, order: Option<&[usize]>) -> Result<Schedule> {
    let order: Vec<usize> = match order {
        Some(o) => {
            crate::schedule::validate_permutation(o, env.num_jobs())?;
            o.to_vec()
        }
        None => (0..env.num_jobs()).collect(),
    };
    let data = greedy_data_assignment(env);
    Ok(greedy_with(env, order, data))
}

fn greedy_with(env: &GridEnvironment, order: Vec<usize>, data: Vec<usize>) -> Schedule {
    let mut jobs = vec![0; env.num_jobs()];
    let mut sim = Simulator::new(env, &data);
    for &j in &order {
        let c = argmin(env.num_cns(), |c| sim.cn_free[c]);
        sim.place(j, c);
        jobs[j] = c;
    }
    Schedule::new(jobs, order, data)
}

/// Best of `runs` greedy passes over random orders. The orders come from
/// one seeded stream, so a larger `runs` sees a superset.
pub fn ensemble_greedy(env: &GridEnvironment, runs: usize, seed: u64) -> Result<Schedule> {
    if runs == 0 {
        return Err(Error::Config("ensemble size must be at least 1".into()));
    }
    Ok(ensemble(env, seed, |k, _| k < runs))
}

/// As many greedy passes as fit in `budget` seconds, and at least `min_runs`.
pub fn ensemble_greedy_budgeted(env: &GridEnvironment, budget: f64, min_runs: usize, seed: u64) -> Schedule {
    let started = Instant::now();
    ensemble(env, seed, |k, _| k < min_runs.max(1) || started.elapsed().as_secs_f64() < budget)
}

fn ensemble(env: &GridEnvironment, seed: u64, mut keep_going: impl FnMut(usize, f64) -> bool) -> Schedule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = greedy_data_assignment(env);
    let mut order: Vec<usize> = (0..env.num_jobs()).collect();
    let mut best: Option<(Schedule, f64)> = None;
    let mut k = 0;
    while keep_going(k, best.as_ref().map_or(f64::INFINITY, |b| b.1)) {
        order.shuffle(&mut rng);
        let s = greedy_with(env, order.clone(), data.clone());
        let m = makespan_of(env, &s);
        if best.as_ref().is_none_or(|b| m < b.1) {
            best = Some((s, m));
        }
        k += 1;
    }
    best.expect("at least one run").0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JobClass {
    ComputeIntensive,
    DataIntensive,
}

/// Best-case execution time over best-case transfer time for `job` given
/// the placement `data`, compared against `threshold`.
pub fn classify(env: &GridEnvironment, data: &[usize], job: usize, threshold: f64) -> JobClass {
    let best_exec = (0..env.num_cns()).map(|c| exec_time(env, job, c)).fold(f64::INFINITY, f64::min);
    let best_transfer = (0..env.num_cns())
        .map(|c| {
            env.job_inputs(job)
                .iter()
                .map(|&d| env.td_remote(d, data[d]) + env.td_local(d, data[d], c))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min);
    if best_exec / best_transfer >= threshold {
        JobClass::ComputeIntensive
    } else {
        JobClass::DataIntensive
    }
}

pub const DIANA_DEFAULT_THRESHOLD: f64 = 1.0;

/// Compute-intensive jobs go to the CN with the lowest backlog plus
/// execution time; data-intensive jobs to the CN where their inputs are
/// ready soonest. Submission order, greedy placement.
pub fn diana(env: &GridEnvironment, threshold: f64) -> Result<Schedule> {
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::Config("DIANA threshold must be positive".into()));
    }
    let data = greedy_data_assignment(env);
    let mut jobs = vec![0; env.num_jobs()];
    let mut sim = Simulator::new(env, &data);
    for j in 0..env.num_jobs() {
        let c = match classify(env, &data, j, threshold) {
            JobClass::ComputeIntensive => argmin(env.num_cns(), |c| sim.cn_free[c] + exec_time(env, j, c)),
            JobClass::DataIntensive => argmin(env.num_cns(), |c| sim.ready(j, c)),
        };
        sim.place(j, c);
        jobs[j] = c;
    }
    let s = Schedule::new(jobs, (0..env.num_jobs()).collect(), data);
    s.validate(env)?;
    Ok(s)
}

/// Every method the harness can run. Serialised by its CLI name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Method {
    Random,
    MinTrans,
    MinExe,
    Greedy,
    EnsGreedy,
    Diana,
    Ga,
    AlterMilp,
    /// A reduced optimiser variant.
    Ablation(Ablation),
}

impl Method {
    pub const BASELINES: [Method; 8] = [
        Method::Random,
        Method::MinTrans,
        Method::MinExe,
        Method::Greedy,
        Method::EnsGreedy,
        Method::Diana,
        Method::Ga,
        Method::AlterMilp,
    ];

    pub fn name(self) -> String {
        match self {
            Method::Random => "random".into(),
            Method::MinTrans => "mintrans".into(),
            Method::MinExe => "minexe".into(),
            Method::Greedy => "greedy".into(),
            Method::EnsGreedy => "ensgreedy".into(),
            Method::Diana => "diana".into(),
            Method::Ga => "ga".into(),
            Method::AlterMilp => "altermilp".into(),
            Method::Ablation(a) => format!("altermilp[{}]", a.label()),
        }
    }

    /// Whether the result depends on wall-clock time.
    pub fn is_time_limited(self) -> bool {
        !matches!(self, Method::Random | Method::Greedy | Method::Diana)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}

impl From<Method> for String {
    fn from(m: Method) -> String {
        m.name()
    }
}

impl TryFrom<String> for Method {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Ok(match key.as_str() {
            "random" => Method::Random,
            "mintrans" => Method::MinTrans,
            "minexe" => Method::MinExe,
            "greedy" => Method::Greedy,
            "ensgreedy" | "ensemble-greedy" => Method::EnsGreedy,
            "diana" => Method::Diana,
            "ga" => Method::Ga,
            "altermilp" => Method::AlterMilp,
            "ja+da" | "altermilp[ja+da]" => Method::Ablation(Ablation::JaDa),
            "ja+jo+da" | "altermilp[ja+jo+da]" => Method::Ablation(Ablation::JaJoDa),
            "ja+jo+da+iter" | "altermilp[ja+jo+da+iter]" => Method::Ablation(Ablation::Full),
            _ => return Err(Error::Config(format!("unknown method `{s}`"))),
        })
    }
}

/// Parameters shared by every method; each reads what it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MethodConfig {
    /// Seconds.
    pub budget: f64,
    pub seed: u64,
    pub iterations: usize,
    /// Fixed ensemble size; `None` fills the budget.
    pub ensemble_size: Option<usize>,
    pub ensemble_min_runs: usize,
    pub diana_threshold: f64,
    pub ga: GaConfig,
    pub altermilp: AlterMilpConfig,
}

impl Default for MethodConfig {
    fn default() -> Self {
        MethodConfig {
            budget: 3.0,
            seed: 0,
            iterations: 3,
            ensemble_size: None,
            ensemble_min_runs: 10,
            diana_threshold: DIANA_DEFAULT_THRESHOLD,
            ga: GaConfig::default(),
            altermilp: AlterMilpConfig::default(),
        }
    }
}

impl MethodConfig {
    pub fn new(budget: f64, seed: u64) -> Self {
        MethodConfig {
            budget,
            seed,
            ..Default::default()
        }
    }

    fn altermilp(&self) -> AlterMilpConfig {
        AlterMilpConfig {
            iterations: self.iterations,
            total_budget: self.budget,
            rng_seed: self.seed,
            ..self.altermilp.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodOutcome {
    pub method: Method,
    pub schedule: Schedule,
    pub makespan: f64,
    pub wall_time: f64,
    pub statuses: Vec<SolveStatus>,
    pub degraded: bool,
    pub trace: Option<OptimizationTrace>,
    pub solves: Vec<SolveRecord>,
}

/// Runs `method` and evaluates its schedule.
pub fn run_method(env: &GridEnvironment, method: Method, config: &MethodConfig) -> Result<MethodOutcome> {
    if !(config.budget > 0.0) {
        return Err(Error::Config(format!("budget must be positive, got {}", config.budget)));
    }
    let started = Instant::now();
    let mut statuses = Vec::new();
    let mut degraded = false;
    let mut trace = None;
    let mut solves = Vec::new();
    let mut restricted = |r: RestrictedSolve| {
        statuses.push(r.status);
        degraded = r.degraded;
        solves.extend(r.record);
        r.schedule
    };
    let schedule = match method {
        Method::Random => random_baseline(env, config.seed),
        Method::MinTrans => restricted(min_trans(env, config.budget, config.seed)?),
        Method::MinExe => restricted(min_exe(env, config.budget, config.seed)?),
        Method::Greedy => greedy(env, None)?,
        Method::EnsGreedy => match config.ensemble_size {
            Some(k) => ensemble_greedy(env, k, config.seed)?,
            None => ensemble_greedy_budgeted(env, config.budget, config.ensemble_min_runs, config.seed),
        },
        Method::Diana => diana(env, config.diana_threshold)?,
        Method::Ga => {
            let ga_cfg = GaConfig {
                budget: config.budget,
                seed: config.seed,
                ..config.ga.clone()
            };
            ga(env, &ga_cfg)?.best
        }
        Method::AlterMilp | Method::Ablation(_) => {
            let base = config.altermilp();
            let cfg = match method {
                Method::Ablation(a) => a.configure(&base),
                _ => base,
            };
            let (s, t) = altermilp::run(env, &cfg)?;
            statuses.extend(t.steps.iter().filter_map(|r| r.status));
            degraded = t.degraded;
            solves.extend(t.solves.iter().cloned());
            trace = Some(t);
            s
        }
    };
    let wall_time = started.elapsed().as_secs_f64();
    let makespan = evaluate(env, &schedule)?.makespan;
    Ok(MethodOutcome {
        method,
        schedule,
        makespan,
        wall_time,
        statuses,
        degraded,
        trace,
        solves,
    })
}

/// Every order greedy can be driven with; for oracle checks on tiny instances.
pub fn best_greedy_over_all_orders(env: &GridEnvironment) -> f64 {
    let data = greedy_data_assignment(env);
    (0..env.num_jobs())
        .permutations(env.num_jobs())
        .map(|o| makespan_of(env, &greedy_with(env, o, data.clone())))
        .fold(f64::INFINITY, f64::min)
}
