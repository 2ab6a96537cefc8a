use std::time::Instant;

use ::highs::{HighsModelStatus, HighsSolutionStatus, Model, RowProblem, Sense};

use super::{MilpBackend, RawOutcome, SolveOptions, SolveStatus};
use crate::model::{MilpModel, RowSense};

/// The HiGHS MIP solver, loaded in-process.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighsBackend;

fn failure(message: impl Into<String>) -> RawOutcome {
    RawOutcome {
        status: SolveStatus::Error,
        values: None,
        diagnostic: Some(message.into()),
    }
}

fn load(model: &MilpModel) -> RowProblem {
    let mut problem = RowProblem::default();
    let mut cost = vec![0.0; model.variables().len()];
    for &(var, c) in model.objective() {
        cost[var.0] += c;
    }
    let cols: Vec<_> = model
        .variables()
        .iter()
        .zip(&cost)
        .map(|(v, &c)| {
            let (lo, hi) = (v.lower, v.upper);
            if v.integer {
                problem.add_integer_column(c, lo..=hi)
            } else {
                problem.add_column(c, lo..=hi)
            }
        })
        .collect();
    for row in model.constraints() {
        let terms: Vec<_> = row.terms.iter().map(|&(var, a)| (cols[var.0], a)).collect();
        match row.sense {
            RowSense::Le => problem.add_row(..=row.rhs, terms),
            RowSense::Ge => problem.add_row(row.rhs.., terms),
            RowSense::Eq => problem.add_row(row.rhs..=row.rhs, terms),
        }
    }
    problem
}

/// Part of the budget held back from HiGHS to absorb its late clock checks.
fn time_reserve(budget: f64) -> f64 {
    (0.25 * budget).min(super::BUDGET_SLACK)
}

impl MilpBackend for HighsBackend {
    fn name(&self) -> &'static str {
        "highs"
    }

    fn solve_raw(&self, model: &MilpModel, options: &SolveOptions) -> RawOutcome {
        let started = Instant::now();
        let mut highs = match Model::try_new(load(model)) {
            Ok(m) => m,
            Err(status) => return failure(format!("HiGHS rejected the model: {status:?}")),
        };
        highs.set_sense(Sense::Minimise);
        highs.make_quiet();
        let remaining = options.time_limit - started.elapsed().as_secs_f64();
        let time_limit = (remaining - time_reserve(options.time_limit)).max(1e-3);
        let mut settings: Vec<(&str, f64)> = vec![
            ("time_limit", time_limit),
            ("mip_rel_gap", options.mip_rel_gap),
        ];
        if options.exact {
            settings.extend([
                ("mip_abs_gap", 0.0),
                ("mip_feasibility_tolerance", 1e-9),
                ("primal_feasibility_tolerance", 1e-9),
            ]);
        }
        for (key, value) in settings {
            if let Err(err) = highs.try_set_option(key, value) {
                return failure(format!("HiGHS option {key}: {err:?}"));
            }
        }
        if let Err(err) = highs.try_set_option("threads", options.threads as i32) {
            return failure(format!("HiGHS option threads: {err:?}"));
        }
        if let Some(warm) = model.warm_start() {
            if highs.try_set_solution(Some(warm), None, None, None).is_err() {
                log::warn!("HiGHS refused the warm start");
            }
        }
        let solved = match highs.try_solve() {
            Ok(s) => s,
            Err(status) => return failure(format!("HiGHS run failed: {status:?}")),
        };
        let has_incumbent = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let values = has_incumbent.then(|| solved.get_solution().columns().to_vec());
        let model_status = solved.status();
        let (status, diagnostic) = match model_status {
            HighsModelStatus::Optimal => (SolveStatus::Optimal, None),
            HighsModelStatus::Infeasible | HighsModelStatus::UnboundedOrInfeasible => {
                (SolveStatus::Infeasible, None)
            }
            HighsModelStatus::ReachedTimeLimit
            | HighsModelStatus::ReachedIterationLimit
            | HighsModelStatus::ReachedSolutionLimit
            | HighsModelStatus::ReachedInterrupt
            | HighsModelStatus::ReachedMemoryLimit
            | HighsModelStatus::ObjectiveBound
            | HighsModelStatus::ObjectiveTarget
                if has_incumbent =>
            {
                (SolveStatus::FeasibleTimeout, None)
            }
            other => (SolveStatus::Error, Some(format!("HiGHS stopped with {other:?}"))),
        };
        RawOutcome {
            status,
            values,
            diagnostic,
        }
    }
}
