//! Model builders for the makespan problem and its fixed-variable restrictions.
//!
//! Row families, with `A` from [`compute_big_a`]:
//!
//! * makespan: `m >= v_j + e_j`
//! * assignment: `sum_c X_jc = 1`, `sum_l Z_dl = 1`
//! * execution: `e_j = sum_c X_jc * exec(j, c)`
//! * order: `Y_ij + Y_ji = 1`
//! * precedence: `u_j >= A * (Y_ij * (X_ic + X_jc - 1) - 1) + v_i + e_i`
//! * staging: `t_d = sum_l remote(d, l) * Z_dl`
//! * arrival: `v_j >= t_d + lan_j(d)` and `v_j >= u_j + lan_j(d)` for `d` in `O_j`,
//!   with `lan_j(d) = sum_{l,c} local(d, l, c) * X_jc * Z_dl`
//! * start: `v_j >= u_j`
//!
//! Whatever is fixed is substituted as a constant; rows that become
//! vacuous under the substitution are not emitted.

use super::{Block, BuilderKind, MilpModel, RowSense, VarId};
use crate::environment::GridEnvironment;
use crate::error::{Error, Result};
use crate::evaluator::{compute_big_a, evaluate, exec_time};
use crate::schedule::{validate_permutation, Schedule};

fn check_job_assignment(env: &GridEnvironment, x: &[usize]) -> Result<()> {
    if x.len() != env.num_jobs() || x.iter().any(|&c| c >= env.num_cns()) {
        return Err(Error::Validation("job assignment does not match the environment".into()));
    }
    Ok(())
}

fn check_data_assignment(env: &GridEnvironment, z: &[usize]) -> Result<()> {
    if z.len() != env.num_objects() || z.iter().any(|&l| l >= env.num_local_sns()) {
        return Err(Error::Validation("data assignment does not match the environment".into()));
    }
    Ok(())
}

fn ranks(priority: &[usize]) -> Vec<usize> {
    let mut rank = vec![0; priority.len()];
    for (pos, &j) in priority.iter().enumerate() {
        rank[j] = pos;
    }
    rank
}

struct TimeVars {
    m: VarId,
    u: Vec<VarId>,
    v: Vec<VarId>,
}

fn add_time_vars(model: &mut MilpModel, jobs: usize) -> TimeVars {
    let m = model.add_continuous("m");
    let u = (0..jobs).map(|j| model.add_continuous(format!("u[{j}]"))).collect();
    let v = (0..jobs).map(|j| model.add_continuous(format!("v[{j}]"))).collect();
    TimeVars { m, u, v }
}

fn binary_grid(model: &mut MilpModel, name: &str, rows: usize, cols: usize) -> Vec<Vec<VarId>> {
    (0..rows)
        .map(|r| (0..cols).map(|c| model.add_binary(format!("{name}[{r},{c}]"))).collect())
        .collect()
}

fn add_one_hot_rows(model: &mut MilpModel, name: &str, grid: &[Vec<VarId>]) {
    for (r, row) in grid.iter().enumerate() {
        model.add_constraint(
            format!("{name}[{r}]"),
            row.iter().map(|&v| (v, 1.0)).collect(),
            RowSense::Eq,
            1.0,
        );
    }
}

/// `v_j >= u_j` for every job.
fn add_start_rows(model: &mut MilpModel, t: &TimeVars) {
    for j in 0..t.u.len() {
        model.add_constraint(
            format!("start[{j}]"),
            vec![(t.v[j], 1.0), (t.u[j], -1.0)],
            RowSense::Ge,
            0.0,
        );
    }
}

/// `MILP(X | Y, Z)`: optimise the job assignment with precedence and data
/// placement held constant. `warm_x`, when given, seeds the solver.
pub fn build_fixed_yz(
    env: &GridEnvironment,
    priority: &[usize],
    data_assignment: &[usize],
    warm_x: Option<&[usize]>,
) -> Result<MilpModel> {
    validate_permutation(priority, env.num_jobs())?;
    check_data_assignment(env, data_assignment)?;
    let (jobs, cns) = (env.num_jobs(), env.num_cns());
    let big_a = compute_big_a(env);
    let mut model = MilpModel::empty(BuilderKind::FixedYz, big_a);

    let x = binary_grid(&mut model, "X", jobs, cns);
    let t = add_time_vars(&mut model, jobs);
    let e: Vec<VarId> = (0..jobs).map(|j| model.add_continuous(format!("e[{j}]"))).collect();
    let staged: Vec<f64> = (0..env.num_objects())
        .map(|d| env.td_remote(d, data_assignment[d]))
        .collect();

    add_one_hot_rows(&mut model, "assign_job", &x);
    for j in 0..jobs {
        let mut terms = vec![(e[j], 1.0)];
        terms.extend((0..cns).map(|c| (x[j][c], -exec_time(env, j, c))));
        model.add_constraint(format!("exec[{j}]"), terms, RowSense::Eq, 0.0);
        model.add_constraint(
            format!("makespan[{j}]"),
            vec![(t.m, 1.0), (t.v[j], -1.0), (e[j], -1.0)],
            RowSense::Ge,
            0.0,
        );
    }

    // Precedence, only for pairs the fixed order activates (rank i < rank j):
    // u_j - v_i - e_i - A X_ic - A X_jc >= -2A
    let rank = ranks(priority);
    for i in 0..jobs {
        for j in 0..jobs {
            if i == j || rank[i] > rank[j] {
                continue;
            }
            for c in 0..cns {
                model.add_constraint(
                    format!("prec[{i},{j},{c}]"),
                    vec![
                        (t.u[j], 1.0),
                        (t.v[i], -1.0),
                        (e[i], -1.0),
                        (x[i][c], -big_a),
                        (x[j][c], -big_a),
                    ],
                    RowSense::Ge,
                    -2.0 * big_a,
                );
            }
        }
    }

    for j in 0..jobs {
        for &d in env.job_inputs(j) {
            let l = data_assignment[d];
            let lan: Vec<(VarId, f64)> = (0..cns).map(|c| (x[j][c], -env.td_local(d, l, c))).collect();
            let mut staged_row = vec![(t.v[j], 1.0)];
            staged_row.extend(lan.iter().copied());
            model.add_constraint(format!("arrive_staged[{j},{d}]"), staged_row, RowSense::Ge, staged[d]);
            let mut started_row = vec![(t.v[j], 1.0), (t.u[j], -1.0)];
            started_row.extend(lan);
            model.add_constraint(format!("arrive_started[{j},{d}]"), started_row, RowSense::Ge, 0.0);
        }
    }
    add_start_rows(&mut model, &t);
    model.set_objective(vec![(t.m, 1.0)]);

    model.layout.x = Block::Free(x);
    model.layout.y = Block::Fixed(priority.to_vec());
    model.layout.z = Block::Fixed(data_assignment.to_vec());
    model.layout.makespan = t.m;
    model.layout.job_start = t.u;
    model.layout.exec_start = t.v;
    model.layout.exec_length = Some(e);

    if let Some(warm) = warm_x {
        let s = Schedule::new(warm.to_vec(), priority.to_vec(), data_assignment.to_vec());
        model.warm_start_with(env, &s);
    }
    Ok(model)
}

/// `MILP(Y, Z | X)`: optimise precedence and data placement with the job
/// assignment held constant. `warm` is `(priority, data_assignment)`.
pub fn build_fixed_x(
    env: &GridEnvironment,
    job_assignment: &[usize],
    warm: Option<(&[usize], &[usize])>,
) -> Result<MilpModel> {
    check_job_assignment(env, job_assignment)?;
    let (jobs, objects, locals) = (env.num_jobs(), env.num_objects(), env.num_local_sns());
    let big_a = compute_big_a(env);
    let mut model = MilpModel::empty(BuilderKind::FixedX, big_a);

    let y: Vec<Vec<Option<VarId>>> = (0..jobs)
        .map(|i| {
            (0..jobs)
                .map(|j| (i != j).then(|| model.add_binary(format!("Y[{i},{j}]"))))
                .collect()
        })
        .collect();
    let z = binary_grid(&mut model, "Z", objects, locals);
    let t = add_time_vars(&mut model, jobs);
    let staged: Vec<VarId> = (0..objects).map(|d| model.add_continuous(format!("t[{d}]"))).collect();
    let exec: Vec<f64> = (0..jobs).map(|j| exec_time(env, j, job_assignment[j])).collect();

    for j in 0..jobs {
        model.add_constraint(
            format!("makespan[{j}]"),
            vec![(t.m, 1.0), (t.v[j], -1.0)],
            RowSense::Ge,
            exec[j],
        );
    }
    for i in 0..jobs {
        for j in (i + 1)..jobs {
            model.add_constraint(
                format!("order[{i},{j}]"),
                vec![(y[i][j].unwrap(), 1.0), (y[j][i].unwrap(), 1.0)],
                RowSense::Eq,
                1.0,
            );
        }
    }
    // Precedence survives only where both jobs share a CN:
    // u_j - v_i - A Y_ij >= e_i - A
    for i in 0..jobs {
        for j in 0..jobs {
            if i == j || job_assignment[i] != job_assignment[j] {
                continue;
            }
            model.add_constraint(
                format!("prec[{i},{j},{}]", job_assignment[i]),
                vec![(t.u[j], 1.0), (t.v[i], -1.0), (y[i][j].unwrap(), -big_a)],
                RowSense::Ge,
                exec[i] - big_a,
            );
        }
    }
    add_one_hot_rows(&mut model, "assign_object", &z);
    for d in 0..objects {
        let mut terms = vec![(staged[d], 1.0)];
        terms.extend((0..locals).map(|l| (z[d][l], -env.td_remote(d, l))));
        model.add_constraint(format!("staging[{d}]"), terms, RowSense::Eq, 0.0);
    }
    for j in 0..jobs {
        let c = job_assignment[j];
        for &d in env.job_inputs(j) {
            let lan: Vec<(VarId, f64)> = (0..locals).map(|l| (z[d][l], -env.td_local(d, l, c))).collect();
            let mut staged_row = vec![(t.v[j], 1.0), (staged[d], -1.0)];
            staged_row.extend(lan.iter().copied());
            model.add_constraint(format!("arrive_staged[{j},{d}]"), staged_row, RowSense::Ge, 0.0);
            let mut started_row = vec![(t.v[j], 1.0), (t.u[j], -1.0)];
            started_row.extend(lan);
            model.add_constraint(format!("arrive_started[{j},{d}]"), started_row, RowSense::Ge, 0.0);
        }
    }
    add_start_rows(&mut model, &t);
    model.set_objective(vec![(t.m, 1.0)]);

    model.layout.x = Block::Fixed(job_assignment.to_vec());
    model.layout.y = Block::Free(y);
    model.layout.z = Block::Free(z);
    model.layout.makespan = t.m;
    model.layout.job_start = t.u;
    model.layout.exec_start = t.v;
    model.layout.remote_delay = Some(staged);

    if let Some((priority, data)) = warm {
        let s = Schedule::new(job_assignment.to_vec(), priority.to_vec(), data.to_vec());
        model.warm_start_with(env, &s);
    }
    Ok(model)
}

/// LP with every integer decision fixed to `schedule`. Its optimum is the
/// replayed makespan.
pub fn build_fixed_all(env: &GridEnvironment, schedule: &Schedule) -> Result<MilpModel> {
    schedule.validate(env)?;
    let jobs = env.num_jobs();
    let big_a = compute_big_a(env);
    let mut model = MilpModel::empty(BuilderKind::FixedAll, big_a);
    let t = add_time_vars(&mut model, jobs);
    let e: Vec<VarId> = (0..jobs)
        .map(|j| {
            let value = exec_time(env, j, schedule.job_assignment[j]);
            model.add_variable(format!("e[{j}]"), value, value, false)
        })
        .collect();
    let staged: Vec<VarId> = (0..env.num_objects())
        .map(|d| {
            let value = env.td_remote(d, schedule.data_assignment[d]);
            model.add_variable(format!("t[{d}]"), value, value, false)
        })
        .collect();

    for j in 0..jobs {
        model.add_constraint(
            format!("makespan[{j}]"),
            vec![(t.m, 1.0), (t.v[j], -1.0), (e[j], -1.0)],
            RowSense::Ge,
            0.0,
        );
    }
    let rank = schedule.ranks();
    for i in 0..jobs {
        for j in 0..jobs {
            let c = schedule.job_assignment[i];
            if i == j || rank[i] > rank[j] || schedule.job_assignment[j] != c {
                continue;
            }
            model.add_constraint(
                format!("prec[{i},{j},{c}]"),
                vec![(t.u[j], 1.0), (t.v[i], -1.0), (e[i], -1.0)],
                RowSense::Ge,
                0.0,
            );
        }
    }
    for j in 0..jobs {
        let c = schedule.job_assignment[j];
        for &d in env.job_inputs(j) {
            let lan = env.td_local(d, schedule.data_assignment[d], c);
            model.add_constraint(
                format!("arrive_staged[{j},{d}]"),
                vec![(t.v[j], 1.0), (staged[d], -1.0)],
                RowSense::Ge,
                lan,
            );
            model.add_constraint(
                format!("arrive_started[{j},{d}]"),
                vec![(t.v[j], 1.0), (t.u[j], -1.0)],
                RowSense::Ge,
                lan,
            );
        }
    }
    add_start_rows(&mut model, &t);
    model.set_objective(vec![(t.m, 1.0)]);

    model.layout.x = Block::Fixed(schedule.job_assignment.clone());
    model.layout.y = Block::Fixed(schedule.priority.clone());
    model.layout.z = Block::Fixed(schedule.data_assignment.clone());
    model.layout.makespan = t.m;
    model.layout.job_start = t.u;
    model.layout.exec_start = t.v;
    model.layout.exec_length = Some(e);
    model.layout.remote_delay = Some(staged);
    Ok(model)
}

/// The full problem with every binary product replaced by an auxiliary
/// binary `w` under `w <= a`, `w <= b`, `w >= a + b - 1`.
pub fn build_monolithic(env: &GridEnvironment) -> Result<MilpModel> {
    let (jobs, cns, objects, locals) = (env.num_jobs(), env.num_cns(), env.num_objects(), env.num_local_sns());
    let big_a = compute_big_a(env);
    let mut model = MilpModel::empty(BuilderKind::Monolithic, big_a);

    let x = binary_grid(&mut model, "X", jobs, cns);
    let y: Vec<Vec<Option<VarId>>> = (0..jobs)
        .map(|i| {
            (0..jobs)
                .map(|j| (i != j).then(|| model.add_binary(format!("Y[{i},{j}]"))))
                .collect()
        })
        .collect();
    let z = binary_grid(&mut model, "Z", objects, locals);
    let t = add_time_vars(&mut model, jobs);
    let e: Vec<VarId> = (0..jobs).map(|j| model.add_continuous(format!("e[{j}]"))).collect();
    let staged: Vec<VarId> = (0..objects).map(|d| model.add_continuous(format!("t[{d}]"))).collect();
    let mut products = Vec::new();
    let mut product = |model: &mut MilpModel, name: String, a: VarId, b: VarId| -> VarId {
        let w = model.add_binary(name.clone());
        model.add_constraint(format!("{name}<=a"), vec![(w, 1.0), (a, -1.0)], RowSense::Le, 0.0);
        model.add_constraint(format!("{name}<=b"), vec![(w, 1.0), (b, -1.0)], RowSense::Le, 0.0);
        model.add_constraint(
            format!("{name}>=a+b-1"),
            vec![(w, 1.0), (a, -1.0), (b, -1.0)],
            RowSense::Ge,
            -1.0,
        );
        products.push((w, a, b));
        w
    };

    add_one_hot_rows(&mut model, "assign_job", &x);
    for j in 0..jobs {
        let mut terms = vec![(e[j], 1.0)];
        terms.extend((0..cns).map(|c| (x[j][c], -exec_time(env, j, c))));
        model.add_constraint(format!("exec[{j}]"), terms, RowSense::Eq, 0.0);
        model.add_constraint(
            format!("makespan[{j}]"),
            vec![(t.m, 1.0), (t.v[j], -1.0), (e[j], -1.0)],
            RowSense::Ge,
            0.0,
        );
    }
    for i in 0..jobs {
        for j in (i + 1)..jobs {
            model.add_constraint(
                format!("order[{i},{j}]"),
                vec![(y[i][j].unwrap(), 1.0), (y[j][i].unwrap(), 1.0)],
                RowSense::Eq,
                1.0,
            );
        }
    }
    // u_j >= A (Y_ij X_ic + Y_ij X_jc - Y_ij - 1) + v_i + e_i
    for i in 0..jobs {
        for j in 0..jobs {
            if i == j {
                continue;
            }
            let yij = y[i][j].unwrap();
            for c in 0..cns {
                let q = product(&mut model, format!("YX_i[{i},{j},{c}]"), yij, x[i][c]);
                let r = product(&mut model, format!("YX_j[{i},{j},{c}]"), yij, x[j][c]);
                model.add_constraint(
                    format!("prec[{i},{j},{c}]"),
                    vec![
                        (t.u[j], 1.0),
                        (t.v[i], -1.0),
                        (e[i], -1.0),
                        (q, -big_a),
                        (r, -big_a),
                        (yij, big_a),
                    ],
                    RowSense::Ge,
                    -big_a,
                );
            }
        }
    }
    add_one_hot_rows(&mut model, "assign_object", &z);
    for d in 0..objects {
        let mut terms = vec![(staged[d], 1.0)];
        terms.extend((0..locals).map(|l| (z[d][l], -env.td_remote(d, l))));
        model.add_constraint(format!("staging[{d}]"), terms, RowSense::Eq, 0.0);
    }
    for j in 0..jobs {
        for &d in env.job_inputs(j) {
            let mut lan = Vec::with_capacity(locals * cns);
            for l in 0..locals {
                for c in 0..cns {
                    let w = product(&mut model, format!("XZ[{j},{d},{l},{c}]"), x[j][c], z[d][l]);
                    lan.push((w, -env.td_local(d, l, c)));
                }
            }
            let mut staged_row = vec![(t.v[j], 1.0), (staged[d], -1.0)];
            staged_row.extend(lan.iter().copied());
            model.add_constraint(format!("arrive_staged[{j},{d}]"), staged_row, RowSense::Ge, 0.0);
            let mut started_row = vec![(t.v[j], 1.0), (t.u[j], -1.0)];
            started_row.extend(lan);
            model.add_constraint(format!("arrive_started[{j},{d}]"), started_row, RowSense::Ge, 0.0);
        }
    }
    add_start_rows(&mut model, &t);
    model.set_objective(vec![(t.m, 1.0)]);

    model.layout.x = Block::Free(x);
    model.layout.y = Block::Free(y);
    model.layout.z = Block::Free(z);
    model.layout.makespan = t.m;
    model.layout.job_start = t.u;
    model.layout.exec_start = t.v;
    model.layout.exec_length = Some(e);
    model.layout.remote_delay = Some(staged);
    model.layout.products = products;
    Ok(model)
}

impl MilpModel {
    /// Full variable assignment realising `schedule`: binaries from the
    /// schedule, times from the replay. Fails if the schedule disagrees with a
    /// block this model holds fixed.
    pub fn encode_schedule(&self, env: &GridEnvironment, schedule: &Schedule) -> Result<Vec<f64>> {
        let report = evaluate(env, schedule)?;
        let layout = &self.layout;
        let mut values: Vec<f64> = self
            .variables
            .iter()
            .map(|v| if v.lower == v.upper { v.lower } else { 0.0 })
            .collect();

        match &layout.x {
            Block::Free(x) => {
                for (j, row) in x.iter().enumerate() {
                    for (c, var) in row.iter().enumerate() {
                        values[var.0] = f64::from(u8::from(schedule.job_assignment[j] == c));
                    }
                }
            }
            Block::Fixed(fixed) if fixed != &schedule.job_assignment => {
                return Err(Error::Validation("schedule changes the fixed job assignment".into()))
            }
            Block::Fixed(_) => {}
        }
        let rank = schedule.ranks();
        match &layout.y {
            Block::Free(y) => {
                for (i, row) in y.iter().enumerate() {
                    for (j, var) in row.iter().enumerate() {
                        if let Some(var) = var {
                            values[var.0] = f64::from(u8::from(rank[i] < rank[j]));
                        }
                    }
                }
            }
            Block::Fixed(fixed) => {
                // Only the per-CN relative order is observable.
                let fixed_rank = ranks(fixed);
                let jobs = rank.len();
                for i in 0..jobs {
                    for j in 0..jobs {
                        if schedule.job_assignment[i] == schedule.job_assignment[j]
                            && (rank[i] < rank[j]) != (fixed_rank[i] < fixed_rank[j])
                        {
                            return Err(Error::Validation("schedule changes the fixed job order".into()));
                        }
                    }
                }
            }
        }
        match &layout.z {
            Block::Free(z) => {
                for (d, row) in z.iter().enumerate() {
                    for (l, var) in row.iter().enumerate() {
                        values[var.0] = f64::from(u8::from(schedule.data_assignment[d] == l));
                    }
                }
            }
            Block::Fixed(fixed) if fixed != &schedule.data_assignment => {
                return Err(Error::Validation("schedule changes the fixed data assignment".into()))
            }
            Block::Fixed(_) => {}
        }
        for &(w, a, b) in &layout.products {
            values[w.0] = values[a.0] * values[b.0];
        }
        values[layout.makespan.0] = report.makespan;
        for (j, var) in layout.job_start.iter().enumerate() {
            values[var.0] = report.job_start[j];
        }
        for (j, var) in layout.exec_start.iter().enumerate() {
            values[var.0] = report.exec_start[j];
        }
        if let Some(e) = &layout.exec_length {
            for (j, var) in e.iter().enumerate() {
                values[var.0] = report.exec_length[j];
            }
        }
        if let Some(t) = &layout.remote_delay {
            for (d, var) in t.iter().enumerate() {
                values[var.0] = report.remote_delay[d];
            }
        }
        Ok(values)
    }

    /// Encodes `schedule` and installs it as the warm start when feasible.
    pub fn warm_start_with(&mut self, env: &GridEnvironment, schedule: &Schedule) -> bool {
        match self.encode_schedule(env, schedule) {
            Ok(values) => self.set_warm_start(values),
            Err(err) => {
                log::warn!("dropping warm start for {} model: {err}", self.kind);
                self.warm_start = None;
                false
            }
        }
    }

    /// Pins every free `Y` variable to the order `priority` by bound
    /// tightening, keeping variable indices stable.
    pub fn fix_priority(&mut self, priority: &[usize]) -> Result<()> {
        let Block::Free(y) = &self.layout.y else {
            return Err(Error::Validation("model has no free precedence block".into()));
        };
        validate_permutation(priority, y.len())?;
        let rank = ranks(priority);
        let pins: Vec<(VarId, f64)> = y
            .iter()
            .enumerate()
            .flat_map(|(i, row)| {
                let rank = &rank;
                row.iter()
                    .enumerate()
                    .filter_map(move |(j, v)| v.map(|v| (v, f64::from(u8::from(rank[i] < rank[j])))))
            })
            .collect();
        for (var, value) in pins {
            self.fix_variable(var, value);
        }
        Ok(())
    }

    /// Reads a schedule back out of a solver assignment.
    ///
    /// Free `Y` values need not be transitive across CNs, so the priority is
    /// rebuilt from the per-CN order they imply (predecessor counts) and the
    /// jobs are then interleaved by their replayed start times.
    pub fn decode_schedule(&self, env: &GridEnvironment, values: &[f64]) -> Result<Schedule> {
        let layout = &self.layout;
        let argmax = |row: &[VarId]| -> usize {
            row.iter()
                .enumerate()
                .max_by(|a, b| values[a.1 .0].total_cmp(&values[b.1 .0]))
                .map(|(k, _)| k)
                .unwrap_or(0)
        };
        let job_assignment = match &layout.x {
            Block::Free(x) => x.iter().map(|row| argmax(row)).collect(),
            Block::Fixed(fixed) => fixed.clone(),
        };
        let data_assignment: Vec<usize> = match &layout.z {
            Block::Free(z) => z.iter().map(|row| argmax(row)).collect(),
            Block::Fixed(fixed) => fixed.clone(),
        };
        let priority = match &layout.y {
            Block::Fixed(fixed) => fixed.clone(),
            Block::Free(y) => {
                let jobs = y.len();
                let before = |i: usize, j: usize| y[i][j].is_some_and(|v| values[v.0] > 0.5);
                let start = |j: usize| values[layout.job_start[j].0];
                let mut per_cn: Vec<Vec<usize>> = vec![Vec::new(); env.num_cns()];
                for j in 0..jobs {
                    per_cn[job_assignment[j]].push(j);
                }
                for queue in per_cn.iter_mut() {
                    let preds: Vec<usize> = queue
                        .iter()
                        .map(|&j| queue.iter().filter(|&&i| before(i, j)).count())
                        .collect();
                    let mut keyed: Vec<(usize, usize)> = preds.into_iter().zip(queue.iter().copied()).collect();
                    keyed.sort_unstable();
                    let consistent = keyed.iter().enumerate().all(|(k, &(p, _))| p == k);
                    *queue = if consistent {
                        keyed.into_iter().map(|(_, j)| j).collect()
                    } else {
                        let mut q = queue.clone();
                        q.sort_by(|&a, &b| start(a).total_cmp(&start(b)).then(a.cmp(&b)));
                        q
                    };
                }
                let draft: Vec<usize> = per_cn.iter().flatten().copied().collect();
                let draft = Schedule::new(job_assignment.clone(), draft, data_assignment.clone());
                let report = evaluate(env, &draft)?;
                let mut cn_rank = vec![0; jobs];
                for queue in &per_cn {
                    for (k, &j) in queue.iter().enumerate() {
                        cn_rank[j] = k;
                    }
                }
                let mut order: Vec<usize> = (0..jobs).collect();
                order.sort_by(|&a, &b| {
                    report.job_start[a]
                        .total_cmp(&report.job_start[b])
                        .then(cn_rank[a].cmp(&cn_rank[b]))
                        .then(a.cmp(&b))
                });
                order
            }
        };
        let schedule = Schedule::new(job_assignment, priority, data_assignment);
        schedule.validate(env)?;
        Ok(schedule)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::altermilp::random_init;
    use crate::environment::{generate, GenerationConfig, GridPreset};
    use crate::evaluator::tests::staged_object_env;
    use crate::model::{RowSense, FEASIBILITY_TOLERANCE};

    fn small(seed: u64) -> GridEnvironment {
        generate(&GenerationConfig::preset(GridPreset::Small, seed)).unwrap()
    }

    fn count_rows(model: &MilpModel, prefix: &str) -> usize {
        model.constraints().iter().filter(|r| r.name.starts_with(prefix)).count()
    }

    #[test]
    fn fixed_yz_counts_on_grid_small() {
        let env = small(1);
        let s = random_init(&env, 1);
        let model = build_fixed_yz(&env, &s.priority, &s.data_assignment, None).unwrap();
        assert_eq!(model.num_integer(), 100);
        assert_eq!(count_rows(&model, "prec["), 450);
        model.validate().unwrap();
    }

    #[test]
    fn fixed_x_counts_on_grid_small() {
        let env = small(2);
        let s = random_init(&env, 2);
        let model = build_fixed_x(&env, &s.job_assignment, None).unwrap();
        let z_binaries = model.variables().iter().filter(|v| v.integer && v.name.starts_with("Z[")).count();
        assert_eq!(z_binaries, 200);
        assert_eq!(model.num_integer(), 200 + 90);
    }

    #[test]
    fn fixed_x_distinct_cns_emit_no_precedence() {
        let env = small(3);
        let distinct: Vec<usize> = (0..10).collect();
        let model = build_fixed_x(&env, &distinct, None).unwrap();
        assert_eq!(count_rows(&model, "prec["), 0);
    }

    #[test]
    fn monolithic_product_counts() {
        let mut cfg = GenerationConfig::preset(GridPreset::Tiny, 4);
        cfg.dimensions.num_jobs = 2;
        cfg.dimensions.num_objects = 2;
        cfg.objects_per_job_range.max = 2;
        let env = generate(&cfg).unwrap();
        let model = build_monolithic(&env).unwrap();
        let yx = model.variables().iter().filter(|v| v.name.starts_with("YX_")).count();
        let xz = model.variables().iter().filter(|v| v.name.starts_with("XZ[")).count();
        assert_eq!(yx, 2 * 1 * 2 * 2);
        let inputs: usize = env.all_job_inputs().iter().map(Vec::len).sum();
        assert_eq!(xz, inputs * 2 * 2);
        assert_eq!(model.layout().products.len(), yx + xz);
    }

    #[test]
    fn encoded_schedules_are_feasible_everywhere() {
        for seed in 0..5 {
            let env = small(seed);
            let s = random_init(&env, seed + 100);
            let m = evaluate(&env, &s).unwrap().makespan;
            let models = [
                build_fixed_yz(&env, &s.priority, &s.data_assignment, Some(&s.job_assignment)).unwrap(),
                build_fixed_x(&env, &s.job_assignment, Some((&s.priority, &s.data_assignment))).unwrap(),
                build_fixed_all(&env, &s).unwrap(),
            ];
            for model in &models {
                let values = model.encode_schedule(&env, &s).unwrap();
                model.check_assignment(&values, FEASIBILITY_TOLERANCE).unwrap();
                assert_eq!(model.objective_value(&values), m);
                assert_eq!(model.decode_schedule(&env, &values).unwrap().job_assignment, s.job_assignment);
            }
            assert!(models[0].warm_start().is_some());
            assert!(models[1].warm_start().is_some());
        }
        let tiny = generate(&GenerationConfig::preset(GridPreset::Tiny, 7)).unwrap();
        let s = random_init(&tiny, 3);
        let mono = build_monolithic(&tiny).unwrap();
        let values = mono.encode_schedule(&tiny, &s).unwrap();
        mono.check_assignment(&values, FEASIBILITY_TOLERANCE).unwrap();
    }

    #[test]
    fn decode_round_trips_per_cn_order() {
        let env = small(9);
        let s = random_init(&env, 9);
        let model = build_fixed_x(&env, &s.job_assignment, None).unwrap();
        let values = model.encode_schedule(&env, &s).unwrap();
        let back = model.decode_schedule(&env, &values).unwrap();
        assert_eq!(evaluate(&env, &back).unwrap().makespan, evaluate(&env, &s).unwrap().makespan);
        assert_eq!(back.data_assignment, s.data_assignment);
    }

    #[test]
    fn mismatched_warm_start_is_dropped() {
        let env = small(5);
        let s = random_init(&env, 5);
        let other = random_init(&env, 6);
        let model = build_fixed_x(&env, &s.job_assignment, Some((&other.priority, &other.data_assignment))).unwrap();
        assert!(model.warm_start().is_some());
        let mut model = build_fixed_x(&env, &other.job_assignment, None).unwrap();
        if other.job_assignment != s.job_assignment {
            assert!(!model.warm_start_with(&env, &s));
        }
    }

    #[test]
    fn fix_priority_pins_order_variables() {
        let env = small(8);
        let s = random_init(&env, 8);
        let mut model = build_fixed_x(&env, &s.job_assignment, None).unwrap();
        model.fix_priority(&s.priority).unwrap();
        let Block::Free(y) = &model.layout().y else { panic!() };
        let rank = s.ranks();
        let v = &model.variables()[y[0][1].unwrap().0];
        assert_eq!(v.lower, v.upper);
        assert_eq!(v.lower, f64::from(u8::from(rank[0] < rank[1])));
    }

    #[test]
    fn invalid_fixed_blocks_are_rejected() {
        let env = small(1);
        assert!(build_fixed_yz(&env, &[0, 1], &[0; 20], None).is_err());
        assert!(build_fixed_yz(&env, &(0..10).collect::<Vec<_>>(), &[10; 20], None).is_err());
        assert!(build_fixed_x(&env, &[10; 10], None).is_err());
        assert!(build_fixed_all(&env, &Schedule::new(vec![0; 10], vec![0; 10], vec![0; 20])).is_err());
    }

    #[test]
    fn big_a_keeps_inactive_precedence_rows_slack() {
        for seed in 0..10 {
            let env = small(seed);
            let s = random_init(&env, seed);
            let mono_env = generate(&GenerationConfig::preset(GridPreset::Tiny, seed)).unwrap();
            let tiny_s = random_init(&mono_env, seed);
            for (env, s, model) in [
                (&env, &s, build_fixed_yz(&env, &s.priority, &s.data_assignment, None).unwrap()),
                (&mono_env, &tiny_s, build_monolithic(&mono_env).unwrap()),
            ] {
                let values = model.encode_schedule(env, s).unwrap();
                let rank = s.ranks();
                for row in model.constraints().iter().filter(|r| r.name.starts_with("prec[")) {
                    let idx: Vec<usize> = row.name[5..row.name.len() - 1]
                        .split(',')
                        .map(|p| p.parse().unwrap())
                        .collect();
                    let (i, j, c) = (idx[0], idx[1], idx[2]);
                    let active = rank[i] < rank[j] && s.job_assignment[i] == c && s.job_assignment[j] == c;
                    assert_eq!(row.sense, RowSense::Ge);
                    let slack = row.activity(&values) - row.rhs;
                    if !active {
                        assert!(slack > 0.0, "inactive row {} binds", row.name);
                    } else {
                        assert!(slack >= -1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn fixed_all_on_single_job() {
        let env = staged_object_env(1);
        let s = Schedule::new(vec![0], vec![0], vec![0]);
        let model = build_fixed_all(&env, &s).unwrap();
        assert_eq!(model.num_integer(), 0);
        let values = model.encode_schedule(&env, &s).unwrap();
        assert_eq!(model.objective_value(&values), 13.0);
    }
}
