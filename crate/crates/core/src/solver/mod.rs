//! Time-budgeted MILP solving behind a backend trait, and an exhaustive
//! oracle for tiny instances.
//!
//! Every assignment a backend returns is substituted back into the model
//! before it is trusted. A feasible warm start acts as the floor: the
//! result is never worse than it.

mod highs;
mod oracle;

pub use self::highs::HighsBackend;
pub use oracle::{brute_force_optimal, candidate_count, OracleLimits};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{MilpModel, FEASIBILITY_TOLERANCE};

/// Environment variable naming the backend. Defaults to `highs`.
pub const BACKEND_ENV_VAR: &str = "GRIDOPT_BACKEND";

/// Allowed wall-time overrun over the budget, as a fraction.
pub const BUDGET_GRACE: f64 = 0.10;

/// Absolute overrun allowed on top of [`BUDGET_GRACE`], in seconds. HiGHS
/// reads its clock only between phases, and presolve cannot be interrupted.
pub const BUDGET_SLACK: f64 = 0.05;

/// Longest wall time a method given `budget` seconds may take.
pub fn wall_allowance(budget: f64) -> f64 {
    budget * (1.0 + BUDGET_GRACE) + BUDGET_SLACK
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    FeasibleTimeout,
    Infeasible,
    Error,
}

impl SolveStatus {
    pub fn has_solution(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::FeasibleTimeout)
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleTimeout => "feasible-timeout",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Error => "error",
        })
    }
}

/// Parameters handed to the backend. Recorded with every result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Seconds.
    pub time_limit: f64,
    pub mip_rel_gap: f64,
    pub threads: u32,
    /// Tighter integrality and feasibility tolerances, for oracle comparisons.
    pub exact: bool,
}

impl SolveOptions {
    pub fn budget(seconds: f64) -> Self {
        SolveOptions {
            time_limit: seconds,
            mip_rel_gap: 1e-6,
            threads: 1,
            exact: false,
        }
    }

    /// Zero gap and tight tolerances.
    pub fn exact(seconds: f64) -> Self {
        SolveOptions {
            time_limit: seconds,
            mip_rel_gap: 0.0,
            threads: 1,
            exact: true,
        }
    }
}

/// What a backend reports before any checking.
#[derive(Debug, Clone)]
pub struct RawOutcome {
    pub status: SolveStatus,
    pub values: Option<Vec<f64>>,
    pub diagnostic: Option<String>,
}

pub trait MilpBackend: Send + Sync {
    fn name(&self) -> &'static str;

    /// Loads variables, rows, objective and warm start, sets the time limit,
    /// runs, and reports the incumbent with its proof status.
    fn solve_raw(&self, model: &MilpModel, options: &SolveOptions) -> RawOutcome;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    /// Value per model variable. Empty unless the status has a solution.
    pub assignment: Vec<f64>,
    /// Objective of `assignment` in seconds; infinite without a solution.
    pub objective: f64,
    pub status: SolveStatus,
    pub wall_time: f64,
    pub backend: String,
    pub options: SolveOptions,
    /// The warm start was returned because the backend produced nothing better.
    pub from_warm_start: bool,
    pub diagnostic: Option<String>,
}

/// One line of a solver log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveRecord {
    pub model: String,
    pub variables: usize,
    pub constraints: usize,
    pub integers: usize,
    pub warm_start: bool,
    pub status: SolveStatus,
    pub objective: Option<f64>,
    pub wall_time: f64,
    pub backend: String,
    pub options: SolveOptions,
    pub from_warm_start: bool,
    pub diagnostic: Option<String>,
}

impl SolveResult {
    pub fn record(&self, model: &MilpModel) -> SolveRecord {
        SolveRecord {
            model: model.kind().to_string(),
            variables: model.variables().len(),
            constraints: model.constraints().len(),
            integers: model.num_integer(),
            warm_start: model.warm_start().is_some(),
            status: self.status,
            objective: self.objective.is_finite().then_some(self.objective),
            wall_time: self.wall_time,
            backend: self.backend.clone(),
            options: self.options,
            from_warm_start: self.from_warm_start,
            diagnostic: self.diagnostic.clone(),
        }
    }
}

/// Resolves a backend by key.
pub fn backend_by_name(name: &str) -> Result<Box<dyn MilpBackend>> {
    match name.trim().to_ascii_lowercase().as_str() {
        "highs" | "" => Ok(Box::new(HighsBackend)),
        other => Err(Error::Config(format!("unknown MILP backend `{other}`"))),
    }
}

/// The backend named by [`BACKEND_ENV_VAR`].
pub fn default_backend() -> Result<Box<dyn MilpBackend>> {
    backend_by_name(&std::env::var(BACKEND_ENV_VAR).unwrap_or_default())
}

/// Solves with the configured backend. An unavailable backend yields an
/// `error` result rather than an `Err`.
pub fn solve(model: &MilpModel, options: &SolveOptions) -> Result<SolveResult> {
    check_request(model, options)?;
    match default_backend() {
        Ok(backend) => solve_with(backend.as_ref(), model, options),
        Err(err) => Ok(SolveResult {
            assignment: Vec::new(),
            objective: f64::INFINITY,
            status: SolveStatus::Error,
            wall_time: 0.0,
            backend: std::env::var(BACKEND_ENV_VAR).unwrap_or_default(),
            options: *options,
            from_warm_start: false,
            diagnostic: Some(err.to_string()),
        }),
    }
}

fn check_request(model: &MilpModel, options: &SolveOptions) -> Result<()> {
    if !(options.time_limit > 0.0) {
        return Err(Error::Config(format!("budget must be positive, got {}", options.time_limit)));
    }
    if options.threads == 0 || !(options.mip_rel_gap >= 0.0) {
        return Err(Error::Config("threads must be positive and the gap non-negative".into()));
    }
    model.validate()
}

pub fn solve_with(backend: &dyn MilpBackend, model: &MilpModel, options: &SolveOptions) -> Result<SolveResult> {
    check_request(model, options)?;
    let started = Instant::now();
    let raw = backend.solve_raw(model, options);
    let mut diagnostic = raw.diagnostic;
    let mut status = raw.status;
    let mut assignment = None;

    if let Some(values) = raw.values.filter(|_| status.has_solution()) {
        match model.check_assignment(&values, FEASIBILITY_TOLERANCE) {
            Ok(()) => assignment = Some(values),
            Err(err) => {
                log::warn!("{} returned an assignment that fails substitution: {err}", backend.name());
                diagnostic = Some(format!("substitution check failed: {err}"));
                status = SolveStatus::Error;
            }
        }
    }

    let mut from_warm_start = false;
    if let Some(warm) = model.warm_start() {
        let warm_obj = model.objective_value(warm);
        let better = assignment
            .as_ref()
            .is_some_and(|v| model.objective_value(v) <= warm_obj);
        if !better {
            assignment = Some(warm.to_vec());
            from_warm_start = true;
            status = SolveStatus::FeasibleTimeout;
        }
    }

    let (assignment, objective) = match assignment {
        Some(values) => {
            let obj = model.objective_value(&values);
            (values, obj)
        }
        None => {
            if status.has_solution() {
                status = SolveStatus::Error;
                diagnostic.get_or_insert_with(|| "time limit reached without an incumbent".into());
            }
            (Vec::new(), f64::INFINITY)
        }
    };

    Ok(SolveResult {
        assignment,
        objective,
        status,
        wall_time: started.elapsed().as_secs_f64(),
        backend: backend.name().to_string(),
        options: *options,
        from_warm_start,
        diagnostic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::altermilp::random_init;
    use crate::environment::{generate, GenerationConfig, GridPreset};
    use crate::evaluator::evaluate;
    use crate::evaluator::tests::staged_object_env;
    use crate::model::{build_fixed_all, build_fixed_x, build_fixed_yz, build_monolithic, RowSense};
    use crate::schedule::Schedule;

    struct Broken(SolveStatus, Option<f64>);

    impl MilpBackend for Broken {
        fn name(&self) -> &'static str {
            "broken"
        }

        fn solve_raw(&self, model: &MilpModel, _: &SolveOptions) -> RawOutcome {
            RawOutcome {
                status: self.0,
                values: self.1.map(|x| vec![x; model.variables().len()]),
                diagnostic: None,
            }
        }
    }

    #[test]
    fn fixed_all_single_job_is_thirteen() {
        let env = staged_object_env(1);
        let model = build_fixed_all(&env, &Schedule::new(vec![0], vec![0], vec![0])).unwrap();
        let r = solve(&model, &SolveOptions::budget(1.0)).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        approx::assert_relative_eq!(r.objective, 13.0, max_relative = 1e-9);
    }

    #[test]
    fn fixed_all_two_jobs_is_sixteen() {
        let env = staged_object_env(2);
        let model = build_fixed_all(&env, &Schedule::new(vec![0, 0], vec![0, 1], vec![0])).unwrap();
        let r = solve(&model, &SolveOptions::budget(1.0)).unwrap();
        approx::assert_relative_eq!(r.objective, 16.0, max_relative = 1e-9);
    }

    #[test]
    fn monolithic_matches_oracle_on_tiny() {
        let env = generate(&GenerationConfig::preset(GridPreset::Tiny, 11)).unwrap();
        let (_, best) = brute_force_optimal(&env, &OracleLimits::default()).unwrap();
        let r = solve(&build_monolithic(&env).unwrap(), &SolveOptions::exact(30.0)).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        approx::assert_relative_eq!(r.objective, best, max_relative = 1e-9);
    }

    #[test]
    fn lp_relaxation_is_a_lower_bound() {
        let env = generate(&GenerationConfig::preset(GridPreset::Tiny, 12)).unwrap();
        let (_, best) = brute_force_optimal(&env, &OracleLimits::default()).unwrap();
        let mut model = build_monolithic(&env).unwrap();
        for v in &mut model.variables {
            v.integer = false;
        }
        let r = solve(&model, &SolveOptions::budget(10.0)).unwrap();
        assert!(r.objective <= best * (1.0 + 1e-9));
    }

    #[test]
    fn warm_started_solves_never_regress() {
        let env = generate(&GenerationConfig::preset(GridPreset::Small, 4)).unwrap();
        for seed in 0..3 {
            let s = random_init(&env, seed);
            let m0 = evaluate(&env, &s).unwrap().makespan;
            let yz = build_fixed_yz(&env, &s.priority, &s.data_assignment, Some(&s.job_assignment)).unwrap();
            let x = build_fixed_x(&env, &s.job_assignment, Some((&s.priority, &s.data_assignment))).unwrap();
            for model in [yz, x] {
                let r = solve(&model, &SolveOptions::budget(0.3)).unwrap();
                assert!(r.status.has_solution());
                assert!(r.objective <= m0 + 1e-6, "{} > {m0}", r.objective);
                model.check_assignment(&r.assignment, FEASIBILITY_TOLERANCE).unwrap();
                assert!(r.wall_time <= wall_allowance(0.3));
            }
        }
    }

    #[test]
    fn bad_backend_answers_fall_back_to_warm_start() {
        let env = generate(&GenerationConfig::preset(GridPreset::Tiny, 2)).unwrap();
        let s = random_init(&env, 2);
        let model = build_fixed_x(&env, &s.job_assignment, Some((&s.priority, &s.data_assignment))).unwrap();
        let warm = model.objective_value(model.warm_start().unwrap());
        for backend in [
            Broken(SolveStatus::Optimal, Some(0.5)),
            Broken(SolveStatus::Error, None),
            Broken(SolveStatus::FeasibleTimeout, None),
        ] {
            let r = solve_with(&backend, &model, &SolveOptions::budget(1.0)).unwrap();
            assert_eq!(r.status, SolveStatus::FeasibleTimeout);
            assert!(r.from_warm_start);
            assert_eq!(r.objective, warm);
        }
    }

    #[test]
    fn substitution_failure_is_an_error_without_warm_start() {
        let env = generate(&GenerationConfig::preset(GridPreset::Tiny, 2)).unwrap();
        let model = build_monolithic(&env).unwrap();
        let r = solve_with(&Broken(SolveStatus::Optimal, Some(0.5)), &model, &SolveOptions::budget(1.0)).unwrap();
        assert_eq!(r.status, SolveStatus::Error);
        assert!(r.assignment.is_empty());
        assert!(r.diagnostic.unwrap().contains("substitution"));
    }

    #[test]
    fn malformed_requests_fail_before_dispatch() {
        let env = staged_object_env(1);
        let mut model = build_fixed_all(&env, &Schedule::new(vec![0], vec![0], vec![0])).unwrap();
        assert!(solve(&model, &SolveOptions::budget(0.0)).is_err());
        model.add_constraint("bogus", vec![(crate::model::VarId(999), 1.0)], RowSense::Le, 1.0);
        assert!(solve(&model, &SolveOptions::budget(1.0)).is_err());
    }

    #[test]
    fn infeasible_models_are_reported() {
        let env = staged_object_env(1);
        let mut model = build_fixed_all(&env, &Schedule::new(vec![0], vec![0], vec![0])).unwrap();
        let m = model.layout().makespan;
        model.add_constraint("cap", vec![(m, 1.0)], RowSense::Le, 1.0);
        let r = solve(&model, &SolveOptions::budget(1.0)).unwrap();
        assert_eq!(r.status, SolveStatus::Infeasible);
    }

    #[test]
    fn unknown_backend_is_a_config_error() {
        assert!(backend_by_name("nonexistent").is_err());
        assert_eq!(backend_by_name("HiGHS").unwrap().name(), "highs");
    }
}
