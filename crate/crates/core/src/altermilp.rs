//! Alternating optimisation over the two induced sub-problems.
//!
//! Starting from a random schedule, each iteration first re-optimises the job
//! assignment with precedence and placement fixed, then re-optimises
//! precedence and placement with the assignment fixed. Each sub-solve is
//! warm-started from the current iterate, so the makespan never increases.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::environment::GridEnvironment;
use crate::error::{Error, Result};
use crate::evaluator::evaluate;
use crate::model::{build_fixed_x, build_fixed_yz, MilpModel};
use crate::schedule::Schedule;
use crate::solver::{self, SolveOptions, SolveRecord, SolveStatus};

/// Uniform job assignment, uniform priority permutation, uniform placement.
pub fn random_init(env: &GridEnvironment, seed: u64) -> Schedule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let job_assignment = (0..env.num_jobs())
        .map(|_| rng.random_range(0..env.num_cns()))
        .collect();
    let mut priority: Vec<usize> = (0..env.num_jobs()).collect();
    priority.shuffle(&mut rng);
    let data_assignment = (0..env.num_objects())
        .map(|_| rng.random_range(0..env.num_local_sns()))
        .collect();
    Schedule::new(job_assignment, priority, data_assignment)
}

/// How the total budget is divided between the `2T` sub-solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SplitPolicy {
    /// `B / 2T` per sub-solve.
    #[default]
    EqualSplit,
    /// Iteration `t` of `T` weighted `T - t + 1`.
    FrontLoaded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlterMilpConfig {
    pub iterations: usize,
    /// Seconds, covering every sub-solve including model construction.
    pub total_budget: f64,
    pub split: SplitPolicy,
    pub rng_seed: u64,
    /// Stop once an iteration that reached proven sub-optima leaves the
    /// makespan unchanged. Turned off in reproduction mode.
    pub early_stop: bool,
    /// Free the precedence block in the second half-step. With `false` only
    /// the data placement is re-optimised there.
    pub optimize_order: bool,
    pub mip_rel_gap: f64,
    /// Backend key; `None` defers to the environment variable.
    pub backend: Option<String>,
}

impl Default for AlterMilpConfig {
    fn default() -> Self {
        AlterMilpConfig {
            iterations: 3,
            total_budget: 3.0,
            split: SplitPolicy::EqualSplit,
            rng_seed: 0,
            early_stop: true,
            optimize_order: true,
            mip_rel_gap: 1e-6,
            backend: None,
        }
    }
}

impl AlterMilpConfig {
    pub fn new(iterations: usize, total_budget: f64, rng_seed: u64) -> Self {
        AlterMilpConfig {
            iterations,
            total_budget,
            rng_seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if !(self.total_budget.is_finite() && self.total_budget > 0.0) {
            return Err(Error::Config(format!("total budget must be positive, got {}", self.total_budget)));
        }
        if !(self.mip_rel_gap >= 0.0) {
            return Err(Error::Config("mip_rel_gap must be non-negative".into()));
        }
        Ok(())
    }

    fn weights(&self) -> Vec<f64> {
        let t = self.iterations;
        (1..=t)
            .flat_map(|k| {
                let w = match self.split {
                    SplitPolicy::EqualSplit => 1.0,
                    SplitPolicy::FrontLoaded => (t - k + 1) as f64,
                };
                [w, w]
            })
            .collect()
    }
}

/// Components switched on in a reduced variant of the optimiser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ablation {
    /// Job assignment and data placement, one pass, priority kept.
    JaDa,
    /// Adds precedence optimisation, one pass.
    JaJoDa,
    /// Everything, `T` passes.
    Full,
}

impl Ablation {
    pub const ALL: [Ablation; 3] = [Ablation::JaDa, Ablation::JaJoDa, Ablation::Full];

    pub fn label(self) -> &'static str {
        match self {
            Ablation::JaDa => "JA+DA",
            Ablation::JaJoDa => "JA+JO+DA",
            Ablation::Full => "JA+JO+DA+Iter",
        }
    }

    /// Applies the variant to `base`, keeping its budget and seed.
    pub fn configure(self, base: &AlterMilpConfig) -> AlterMilpConfig {
        let mut cfg = base.clone();
        match self {
            Ablation::JaDa => {
                cfg.iterations = 1;
                cfg.optimize_order = false;
            }
            Ablation::JaJoDa => {
                cfg.iterations = 1;
                cfg.optimize_order = true;
            }
            Ablation::Full => cfg.optimize_order = true,
        }
        cfg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Init,
    /// `MILP(X | Y, Z)`
    JobAssignment,
    /// `MILP(Y, Z | X)`, or `MILP(Z | X, Y)` when precedence is held.
    OrderAndPlacement,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 0 for the initial schedule, then 1-based.
    pub iteration: usize,
    pub kind: StepKind,
    /// Evaluated makespan of the iterate after this step.
    pub makespan: f64,
    pub status: Option<SolveStatus>,
    pub wall_time: f64,
    pub budget: f64,
    /// The solver's candidate replaced the iterate.
    pub accepted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Completed,
    BudgetExhausted,
    Converged,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub steps: Vec<StepRecord>,
    pub stop_reason: StopReason,
    /// Every sub-solve failed; the result is the initial schedule.
    pub degraded: bool,
    pub total_wall_time: f64,
    pub solves: Vec<SolveRecord>,
}

impl OptimizationTrace {
    pub fn solver_calls(&self) -> usize {
        self.steps.iter().filter(|s| s.status.is_some()).count()
    }

    pub fn makespans(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.makespan).collect()
    }

    pub fn final_makespan(&self) -> f64 {
        self.steps.last().map_or(f64::INFINITY, |s| s.makespan)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}

/// Runs from `random_init(env, config.rng_seed)`.
pub fn run(env: &GridEnvironment, config: &AlterMilpConfig) -> Result<(Schedule, OptimizationTrace)> {
    run_from(env, config, random_init(env, config.rng_seed))
}

/// Budget left below which no further sub-solve is attempted.
const MIN_STEP_BUDGET: f64 = 1e-3;

pub fn run_from(
    env: &GridEnvironment,
    config: &AlterMilpConfig,
    initial: Schedule,
) -> Result<(Schedule, OptimizationTrace)> {
    config.validate()?;
    initial.validate(env)?;
    let started = Instant::now();
    let weights = config.weights();
    let mut current = initial;
    let mut makespan = evaluate(env, &current)?.makespan;
    let mut steps = vec![StepRecord {
        iteration: 0,
        kind: StepKind::Init,
        makespan,
        status: None,
        wall_time: 0.0,
        budget: 0.0,
        accepted: true,
    }];
    let mut solves = Vec::new();
    let mut stop_reason = StopReason::Completed;
    let mut any_success = false;

    'outer: for iteration in 1..=config.iterations {
        let before = makespan;
        let mut all_proven = true;
        for (half, kind) in [StepKind::JobAssignment, StepKind::OrderAndPlacement].into_iter().enumerate() {
            let k = 2 * (iteration - 1) + half;
            let remaining = config.total_budget - started.elapsed().as_secs_f64();
            let share: f64 = weights[k..].iter().sum();
            let budget = remaining * weights[k] / share;
            if budget < MIN_STEP_BUDGET {
                stop_reason = StopReason::BudgetExhausted;
                break 'outer;
            }
            let step_started = Instant::now();
            let (status, candidate) = step(env, config, &current, kind, budget, &mut solves);
            all_proven &= status == SolveStatus::Optimal;
            any_success |= status.has_solution();
            let mut accepted = false;
            if let Some(candidate) = candidate {
                let m = evaluate(env, &candidate)?.makespan;
                if m <= makespan {
                    accepted = true;
                    current = candidate;
                    makespan = m;
                } else {
                    log::debug!("rejecting {kind:?} candidate: {m} > {makespan}");
                }
            }
            steps.push(StepRecord {
                iteration,
                kind,
                makespan,
                status: Some(status),
                wall_time: step_started.elapsed().as_secs_f64(),
                budget,
                accepted,
            });
        }
        if config.early_stop && all_proven && before - makespan <= 1e-9 * before && iteration < config.iterations {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    let degraded = !steps.iter().all(|s| s.status.is_none()) && !any_success;
    Ok((
        current,
        OptimizationTrace {
            steps,
            stop_reason,
            degraded,
            total_wall_time: started.elapsed().as_secs_f64(),
            solves,
        },
    ))
}

fn step(
    env: &GridEnvironment,
    config: &AlterMilpConfig,
    current: &Schedule,
    kind: StepKind,
    budget: f64,
    log: &mut Vec<SolveRecord>,
) -> (SolveStatus, Option<Schedule>) {
    let built: Result<MilpModel> = match kind {
        StepKind::JobAssignment => build_fixed_yz(
            env,
            &current.priority,
            &current.data_assignment,
            Some(&current.job_assignment),
        ),
        _ => build_fixed_x(
            env,
            &current.job_assignment,
            Some((&current.priority, &current.data_assignment)),
        )
        .and_then(|mut m| {
            if !config.optimize_order {
                m.fix_priority(&current.priority)?;
            }
            Ok(m)
        }),
    };
    let model = match built {
        Ok(m) => m,
        Err(err) => {
            log::warn!("could not build {kind:?} model: {err}");
            return (SolveStatus::Error, None);
        }
    };
    let options = SolveOptions {
        mip_rel_gap: config.mip_rel_gap,
        ..SolveOptions::budget(budget)
    };
    let backend = match config.backend.as_deref() {
        Some(name) => solver::backend_by_name(name),
        None => solver::default_backend(),
    };
    let backend = match backend {
        Ok(b) => b,
        Err(err) => {
            log::warn!("{err}");
            return (SolveStatus::Error, None);
        }
    };
    let result = match solver::solve_with(backend.as_ref(), &model, &options) {
        Ok(r) => r,
        Err(err) => {
            log::warn!("{kind:?} solve failed: {err}");
            return (SolveStatus::Error, None);
        }
    };
    log.push(result.record(&model));
    if !result.status.has_solution() {
        return (result.status, None);
    }
    match model.decode_schedule(env, &result.assignment) {
        Ok(s) => (result.status, Some(s)),
        Err(err) => {
            log::warn!("could not decode {kind:?} solution: {err}");
            (SolveStatus::Error, None)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{generate, GenerationConfig, GridPreset};
    use crate::solver::{brute_force_optimal, OracleLimits};

    fn env(preset: GridPreset, seed: u64) -> GridEnvironment {
        generate(&GenerationConfig::preset(preset, seed)).unwrap()
    }

    #[test]
    fn random_init_single_choice_dimensions() {
        let mut cfg = GenerationConfig::preset(GridPreset::Small, 1);
        cfg.dimensions.num_cns = 1;
        cfg.dimensions.num_local_sns = 1;
        let env = generate(&cfg).unwrap();
        let a = random_init(&env, 1);
        assert!(a.job_assignment.iter().all(|&c| c == 0));
        assert!(a.data_assignment.iter().all(|&l| l == 0));
        let perms: std::collections::HashSet<_> = (0..20).map(|s| random_init(&env, s).priority).collect();
        assert!(perms.len() > 1);
    }

    #[test]
    fn random_init_is_deterministic_and_valid() {
        let env = env(GridPreset::Medium, 3);
        assert_eq!(random_init(&env, 7), random_init(&env, 7));
        for s in 0..50 {
            random_init(&env, s).validate(&env).unwrap();
        }
    }

    #[test]
    fn weights_follow_policy() {
        let mut cfg = AlterMilpConfig::new(3, 6.0, 0);
        assert_eq!(cfg.weights(), vec![1.0; 6]);
        cfg.split = SplitPolicy::FrontLoaded;
        assert_eq!(cfg.weights(), vec![3.0, 3.0, 2.0, 2.0, 1.0, 1.0]);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let env = env(GridPreset::Tiny, 0);
        assert!(run(&env, &AlterMilpConfig::new(0, 1.0, 0)).is_err());
        assert!(run(&env, &AlterMilpConfig::new(1, 0.0, 0)).is_err());
    }

    #[test]
    fn one_iteration_makes_two_solver_calls() {
        let env = env(GridPreset::Small, 2);
        let (s, trace) = run(&env, &AlterMilpConfig::new(1, 1.0, 2)).unwrap();
        assert_eq!(trace.solver_calls(), 2);
        assert_eq!(trace.steps[1].kind, StepKind::JobAssignment);
        assert_eq!(trace.steps[2].kind, StepKind::OrderAndPlacement);
        assert!((trace.steps[1].budget - 0.5).abs() < 0.05);
        assert_eq!(evaluate(&env, &s).unwrap().makespan, trace.final_makespan());
    }

    #[test]
    fn trace_is_monotone_and_agrees_with_evaluator() {
        let env = env(GridPreset::Small, 5);
        let cfg = AlterMilpConfig::new(3, 1.5, 5);
        let (s, trace) = run(&env, &cfg).unwrap();
        let ms = trace.makespans();
        assert!(ms.windows(2).all(|w| w[1] <= w[0]));
        assert!(trace.final_makespan() <= ms[0]);
        approx::assert_relative_eq!(evaluate(&env, &s).unwrap().makespan, trace.final_makespan(), max_relative = 1e-6);
        assert!(trace.total_wall_time <= solver::wall_allowance(cfg.total_budget));
        assert!(!trace.degraded);
    }

    #[test]
    fn fixed_order_variant_keeps_per_cn_order_after_second_step() {
        let env = env(GridPreset::Small, 6);
        let cfg = Ablation::JaDa.configure(&AlterMilpConfig::new(3, 1.0, 6));
        let (s, trace) = run(&env, &cfg).unwrap();
        assert_eq!(trace.solver_calls(), 2);
        assert!(trace.final_makespan() <= trace.steps[0].makespan);
        s.validate(&env).unwrap();
    }

    #[test]
    fn tiny_instance_reaches_near_optimum() {
        let env = env(GridPreset::Tiny, 4);
        let (_, best) = brute_force_optimal(&env, &OracleLimits::default()).unwrap();
        let (_, trace) = run(&env, &AlterMilpConfig::new(3, 5.0, 4)).unwrap();
        assert!(trace.final_makespan() >= best * (1.0 - 1e-9));
    }

    #[test]
    fn unavailable_backend_degrades_to_initial_schedule() {
        let env = env(GridPreset::Tiny, 1);
        let cfg = AlterMilpConfig {
            backend: Some("missing".into()),
            ..AlterMilpConfig::new(2, 1.0, 1)
        };
        let (s, trace) = run(&env, &cfg).unwrap();
        assert!(trace.degraded);
        assert_eq!(s, random_init(&env, 1));
        assert_eq!(trace.solver_calls(), 4);
        assert!(trace.steps.iter().skip(1).all(|r| r.status == Some(SolveStatus::Error) && !r.accepted));
    }
}
