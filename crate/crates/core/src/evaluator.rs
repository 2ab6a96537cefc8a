//! Exact makespan of a schedule, obtained by replaying the grid pipeline.
//!
//! Remote staging of every object starts at time zero. Jobs are then visited
//! in descending priority; each job starts when its CN frees up, pulls every
//! input over the LAN once the input is staged and the job has started, and
//! executes once the last input has arrived.

use serde::{Deserialize, Serialize};

use crate::environment::GridEnvironment;
use crate::error::{Error, Result};
use crate::schedule::Schedule;

/// Timing vectors of a replayed schedule, all in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MakespanReport {
    /// `u`: instant the job reaches the head of its CN queue.
    pub job_start: Vec<f64>,
    /// `v`: instant execution begins (all inputs on the CN).
    pub exec_start: Vec<f64>,
    /// `e`: execution length.
    pub exec_length: Vec<f64>,
    /// `t`: WAN staging delay per object.
    pub remote_delay: Vec<f64>,
    pub makespan: f64,
    pub jobs: Vec<JobTrace>,
}

/// One job's line in the replay, in visiting order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobTrace {
    pub job: usize,
    pub cn: usize,
    pub start: f64,
    pub exec_start: f64,
    pub completion: f64,
}

impl MakespanReport {
    pub fn completion(&self, job: usize) -> f64 {
        self.exec_start[job] + self.exec_length[job]
    }
}

/// Execution time of `job` on `cn`: `gamma * total input size / speed`.
pub fn execution_time(env: &GridEnvironment, job: usize, cn: usize) -> Result<f64> {
    if job >= env.num_jobs() {
        return Err(Error::domain("job", job, env.num_jobs()));
    }
    if cn >= env.num_cns() {
        return Err(Error::domain("CN", cn, env.num_cns()));
    }
    Ok(exec_time(env, job, cn))
}

#[inline]
pub(crate) fn exec_time(env: &GridEnvironment, job: usize, cn: usize) -> f64 {
    env.gamma() * env.job_input_size(job) / env.cn_speeds()[cn]
}

/// Replays `schedule` on `env`. The schedule is validated first.
pub fn evaluate(env: &GridEnvironment, schedule: &Schedule) -> Result<MakespanReport> {
    schedule.validate(env)?;
    Ok(replay(env, schedule))
}

/// Makespan only, for hot loops over already-valid schedules.
pub(crate) fn makespan_of(env: &GridEnvironment, schedule: &Schedule) -> f64 {
    let staged: Vec<f64> = (0..env.num_objects())
        .map(|d| env.td_remote(d, schedule.data_assignment[d]))
        .collect();
    let mut cn_free = vec![0.0_f64; env.num_cns()];
    let mut makespan = 0.0_f64;
    for &job in &schedule.priority {
        let cn = schedule.job_assignment[job];
        let start = cn_free[cn];
        let mut ready = start;
        for &d in env.job_inputs(job) {
            let begin = start.max(staged[d]);
            ready = ready.max(begin + env.td_local(d, schedule.data_assignment[d], cn));
        }
        cn_free[cn] = ready + exec_time(env, job, cn);
        makespan = makespan.max(cn_free[cn]);
    }
    makespan
}

fn replay(env: &GridEnvironment, schedule: &Schedule) -> MakespanReport {
    let n = env.num_jobs();
    let remote_delay: Vec<f64> = (0..env.num_objects())
        .map(|d| env.td_remote(d, schedule.data_assignment[d]))
        .collect();
    let mut cn_free = vec![0.0_f64; env.num_cns()];
    let mut job_start = vec![0.0; n];
    let mut exec_start = vec![0.0; n];
    let mut exec_length = vec![0.0; n];
    let mut jobs = Vec::with_capacity(n);
    let mut makespan = 0.0_f64;

    for &job in &schedule.priority {
        let cn = schedule.job_assignment[job];
        let u = cn_free[cn];
        let mut v = u;
        for &d in env.job_inputs(job) {
            let begin = u.max(remote_delay[d]);
            v = v.max(begin + env.td_local(d, schedule.data_assignment[d], cn));
        }
        let e = exec_time(env, job, cn);
        cn_free[cn] = v + e;
        makespan = makespan.max(cn_free[cn]);
        job_start[job] = u;
        exec_start[job] = v;
        exec_length[job] = e;
        jobs.push(JobTrace {
            job,
            cn,
            start: u,
            exec_start: v,
            completion: v + e,
        });
    }

    MakespanReport {
        job_start,
        exec_start,
        exec_length,
        remote_delay,
        makespan,
        jobs,
    }
}

/// Big-M constant for the precedence rows: an upper bound on the makespan of
/// every schedule, plus one.
pub fn compute_big_a(env: &GridEnvironment) -> f64 {
    let per_job: f64 = (0..env.num_jobs())
        .map(|j| {
            let inputs = env.job_inputs(j);
            let worst_remote = inputs
                .iter()
                .flat_map(|&d| (0..env.num_local_sns()).map(move |l| env.td_remote(d, l)))
                .fold(0.0, f64::max);
            let worst_local = inputs
                .iter()
                .flat_map(|&d| {
                    (0..env.num_local_sns())
                        .flat_map(move |l| (0..env.num_cns()).map(move |c| env.td_local(d, l, c)))
                })
                .fold(0.0, f64::max);
            let worst_exec = (0..env.num_cns())
                .map(|c| exec_time(env, j, c))
                .fold(0.0, f64::max);
            worst_remote + worst_local + worst_exec
        })
        .sum();
    per_job + 1.0
}
