//! Seeded multi-method experiments, budget sweeps and iteration sweeps.
//!
//! Each `(setup, seed, method)` triple is one work item. The environment for
//! a seed is generated from that seed, so every method in an experiment sees
//! the same instances. Results are two CSV files:
//!
//! * `raw.csv`: `setup,method,seed,makespan,wall_time,statuses,degraded,error,relative_to_random`
//! * `aggregate.csv`: `setup,method,runs,failed,mean_makespan,mean_relative_to_random,rank,average_rank`
//!
//! `relative_to_random` is `(m - m_random) / m_random` on the same seed and
//! setup, so a 40% shorter makespan reads `-0.40`. The experiment config is
//! written next to them as `config.json`, and each work item's solver calls
//! go to `logs/<setup>__<method>__<seed>.jsonl`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{run_method, Method, MethodConfig};
use crate::environment::{generate, GenerationConfig, GridPreset};
use crate::error::{Error, Result};

/// Iteration count at which both sweep modes coincide.
pub const REFERENCE_ITERATIONS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvironmentSpec {
    Preset(GridPreset),
    Generation(GenerationConfig),
}

impl EnvironmentSpec {
    /// The generation config for `seed`; the seed replaces any stored one.
    pub fn for_seed(&self, seed: u64) -> GenerationConfig {
        match self {
            EnvironmentSpec::Preset(p) => GenerationConfig::preset(*p, seed),
            EnvironmentSpec::Generation(g) => GenerationConfig {
                rng_seed: seed,
                ..g.clone()
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodEntry {
    pub method: Method,
    /// Overrides the shared defaults for this method.
    #[serde(default)]
    pub config: Option<MethodConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub environment: EnvironmentSpec,
    pub methods: Vec<MethodEntry>,
    pub seeds: Vec<u64>,
    /// Seconds per method run.
    pub budget: f64,
    #[serde(default)]
    pub method_defaults: MethodConfig,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Runs every optimiser iteration, without early stopping.
    #[serde(default)]
    pub reproduction_mode: bool,
    /// Work items in flight at once.
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

fn default_name() -> String {
    "experiment".into()
}

fn default_parallelism() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(environment: EnvironmentSpec, methods: &[Method], seeds: Vec<u64>, budget: f64) -> Self {
        ExperimentConfig {
            name: default_name(),
            environment,
            methods: methods
                .iter()
                .map(|&method| MethodEntry { method, config: None })
                .collect(),
            seeds,
            budget,
            method_defaults: MethodConfig::default(),
            output_dir: None,
            reproduction_mode: false,
            parallelism: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() || self.methods.is_empty() {
            return Err(Error::Config("an experiment needs at least one seed and one method".into()));
        }
        if !(self.budget.is_finite() && self.budget > 0.0) {
            return Err(Error::Config(format!("budget must be positive, got {}", self.budget)));
        }
        if self.parallelism == 0 {
            return Err(Error::Config("parallelism must be at least 1".into()));
        }
        self.environment.for_seed(0).validate()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn method_config(&self, entry: &MethodEntry, seed: u64, budget: f64) -> MethodConfig {
        let mut cfg = entry.config.clone().unwrap_or_else(|| self.method_defaults.clone());
        cfg.budget = budget;
        cfg.seed = seed;
        if self.reproduction_mode {
            cfg.altermilp.early_stop = false;
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub setup: String,
    pub method: String,
    pub seed: u64,
    pub makespan: Option<f64>,
    pub wall_time: f64,
    /// Solver statuses in call order, `;`-separated.
    pub statuses: String,
    pub degraded: bool,
    pub error: String,
    pub relative_to_random: Option<f64>,
}

impl ResultRow {
    pub fn failed(&self) -> bool {
        self.makespan.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub setup: String,
    pub method: String,
    pub runs: usize,
    /// Rows left out of the means because the method failed.
    pub failed: usize,
    pub mean_makespan: Option<f64>,
    pub mean_relative_to_random: Option<f64>,
    /// 1 is the lowest mean makespan within the setup.
    pub rank: Option<usize>,
    /// Mean rank of the method across all setups.
    pub average_rank: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<AggregateRow>,
}

impl ExperimentResult {
    pub fn aggregate_for(&self, setup: &str, method: Method) -> Option<&AggregateRow> {
        let name = method.name();
        self.aggregates.iter().find(|a| a.setup == setup && a.method == name)
    }

    pub fn mean_makespan(&self, setup: &str, method: Method) -> Option<f64> {
        self.aggregate_for(setup, method)?.mean_makespan
    }

    /// Makespans of `method` in `setup`, keyed by seed.
    pub fn makespans(&self, setup: &str, method: Method) -> BTreeMap<u64, f64> {
        let name = method.name();
        self.rows
            .iter()
            .filter(|r| r.setup == setup && r.method == name)
            .filter_map(|r| Some((r.seed, r.makespan?)))
            .collect()
    }
}

/// One setup of a sweep: a label and the budget/iteration overrides.
#[derive(Debug, Clone, PartialEq)]
struct Setup {
    label: String,
    budget: f64,
    iterations: Option<usize>,
}

struct WorkItem<'a> {
    setup: &'a Setup,
    seed: u64,
    entry: &'a MethodEntry,
}

/// Runs every `(seed, method)` pair at the configured budget.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let setup = Setup {
        label: format!("budget={}", config.budget),
        budget: config.budget,
        iterations: None,
    };
    run_setups(config, &[setup])
}

/// One setup per budget.
pub fn sweep_budget(config: &ExperimentConfig, budgets: &[f64]) -> Result<ExperimentResult> {
    if budgets.is_empty() || budgets.iter().any(|b| !(*b > 0.0)) {
        return Err(Error::Config("budgets must be a non-empty list of positive values".into()));
    }
    let setups: Vec<Setup> = budgets
        .iter()
        .map(|&b| Setup {
            label: format!("budget={b}"),
            budget: b,
            iterations: None,
        })
        .collect();
    run_setups(config, &setups)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IterationMode {
    /// Total budget fixed; each iteration gets less as `T` grows.
    Divided,
    /// Per-iteration budget fixed at `budget / 3`; the total grows with `T`.
    Same,
}

impl std::str::FromStr for IterationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "divided" => Ok(IterationMode::Divided),
            "same" => Ok(IterationMode::Same),
            other => Err(Error::Config(format!("unknown iteration mode `{other}`"))),
        }
    }
}

/// One setup per iteration count. Both modes coincide at `T = 3`.
pub fn sweep_iterations(config: &ExperimentConfig, iterations: &[usize], mode: IterationMode) -> Result<ExperimentResult> {
    if iterations.is_empty() || iterations.contains(&0) {
        return Err(Error::Config("iteration counts must be a non-empty list of positive values".into()));
    }
    let setups: Vec<Setup> = iterations
        .iter()
        .map(|&t| {
            let budget = match mode {
                IterationMode::Divided => config.budget,
                IterationMode::Same => config.budget / REFERENCE_ITERATIONS as f64 * t as f64,
            };
            Setup {
                label: format!("T={t}"),
                budget,
                iterations: Some(t),
            }
        })
        .collect();
    run_setups(config, &setups)
}

fn run_setups(config: &ExperimentConfig, setups: &[Setup]) -> Result<ExperimentResult> {
    config.validate()?;
    let items: Vec<WorkItem> = setups
        .iter()
        .flat_map(|setup| {
            config
                .seeds
                .iter()
                .flat_map(move |&seed| config.methods.iter().map(move |entry| WorkItem { setup, seed, entry }))
        })
        .collect();
    let log_dir = config.output_dir.as_ref().map(|d| d.join("logs"));
    if let Some(dir) = &log_dir {
        std::fs::create_dir_all(dir)?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| Error::Config(format!("could not start worker pool: {e}")))?;
    let mut rows: Vec<ResultRow> =
        pool.install(|| items.par_iter().map(|item| run_item(config, item, log_dir.as_deref())).collect());
    fill_relative(&mut rows);
    let aggregates = aggregate(&rows);
    let result = ExperimentResult { rows, aggregates };
    if let Some(dir) = &config.output_dir {
        std::fs::write(dir.join("config.json"), config.to_json()?)?;
        write_rows(dir.join("raw.csv"), &result.rows)?;
        write_aggregates(dir.join("aggregate.csv"), &result.aggregates)?;
    }
    Ok(result)
}

fn run_item(config: &ExperimentConfig, item: &WorkItem, log_dir: Option<&Path>) -> ResultRow {
    let mut method_cfg = config.method_config(item.entry, item.seed, item.setup.budget);
    if let Some(t) = item.setup.iterations {
        method_cfg.iterations = t;
    }
    let method = item.entry.method;
    let mut row = ResultRow {
        setup: item.setup.label.clone(),
        method: method.name(),
        seed: item.seed,
        makespan: None,
        wall_time: 0.0,
        statuses: String::new(),
        degraded: false,
        error: String::new(),
        relative_to_random: None,
    };
    let outcome = generate(&config.environment.for_seed(item.seed)).and_then(|env| run_method(&env, method, &method_cfg));
    match outcome {
        Ok(out) => {
            row.makespan = Some(out.makespan);
            row.wall_time = out.wall_time;
            row.statuses = out.statuses.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";");
            row.degraded = out.degraded;
            if let Some(dir) = log_dir {
                let name = format!("{}__{}__{}.jsonl", sanitize(&row.setup), sanitize(&row.method), row.seed);
                if let Err(err) = write_jsonl(&dir.join(name), &out.solves) {
                    log::warn!("could not write solver log: {err}");
                }
            }
        }
        Err(err) => {
            log::warn!("{} on seed {} failed: {err}", row.method, row.seed);
            row.error = err.to_string();
        }
    }
    row
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' }).collect()
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Fills `relative_to_random` from the Random row of the same setup and seed.
pub fn fill_relative(rows: &mut [ResultRow]) {
    let random_name = Method::Random.name();
    let reference: BTreeMap<(String, u64), f64> = rows
        .iter()
        .filter(|r| r.method == random_name)
        .filter_map(|r| Some(((r.setup.clone(), r.seed), r.makespan?)))
        .collect();
    for row in rows.iter_mut() {
        row.relative_to_random = match (row.makespan, reference.get(&(row.setup.clone(), row.seed))) {
            (Some(m), Some(&base)) => Some((m - base) / base),
            _ => None,
        };
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Per-setup means and ranks, recomputed from raw rows alone.
pub fn aggregate(rows: &[ResultRow]) -> Vec<AggregateRow> {
    let mut setups: Vec<String> = Vec::new();
    let mut groups: BTreeMap<(String, String), Vec<&ResultRow>> = BTreeMap::new();
    let mut method_order: Vec<String> = Vec::new();
    for r in rows {
        if !setups.contains(&r.setup) {
            setups.push(r.setup.clone());
        }
        if !method_order.contains(&r.method) {
            method_order.push(r.method.clone());
        }
        groups.entry((r.setup.clone(), r.method.clone())).or_default().push(r);
    }
    let mut out = Vec::new();
    for setup in &setups {
        let mut block: Vec<AggregateRow> = method_order
            .iter()
            .filter_map(|m| groups.get(&(setup.clone(), m.clone())).map(|g| (m, g)))
            .map(|(m, group)| {
                let ok: Vec<&&ResultRow> = group.iter().filter(|r| !r.failed()).collect();
                AggregateRow {
                    setup: setup.clone(),
                    method: m.clone(),
                    runs: group.len(),
                    failed: group.len() - ok.len(),
                    mean_makespan: mean(ok.iter().filter_map(|r| r.makespan)),
                    mean_relative_to_random: mean(ok.iter().filter_map(|r| r.relative_to_random)),
                    rank: None,
                    average_rank: None,
                }
            })
            .collect();
        let mut ranked: Vec<usize> = (0..block.len()).filter(|&k| block[k].mean_makespan.is_some()).collect();
        ranked.sort_by(|&a, &b| {
            block[a].mean_makespan.unwrap().total_cmp(&block[b].mean_makespan.unwrap()).then(a.cmp(&b))
        });
        for (pos, k) in ranked.into_iter().enumerate() {
            block[k].rank = Some(pos + 1);
        }
        out.extend(block);
    }
    let averages: BTreeMap<String, f64> = method_order
        .iter()
        .filter_map(|m| {
            mean(out.iter().filter(|a| &a.method == m).filter_map(|a| a.rank.map(|r| r as f64))).map(|v| (m.clone(), v))
        })
        .collect();
    for a in &mut out {
        a.average_rank = averages.get(&a.method).copied();
    }
    out
}

pub fn write_rows(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

pub fn write_aggregates(path: impl AsRef<Path>, rows: &[AggregateRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_aggregates(path: impl AsRef<Path>) -> Result<Vec<AggregateRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(setup: &str, method: &str, seed: u64, m: Option<f64>) -> ResultRow {
        ResultRow {
            setup: setup.into(),
            method: method.into(),
            seed,
            makespan: m,
            wall_time: 0.0,
            statuses: String::new(),
            degraded: false,
            error: if m.is_none() { "boom".into() } else { String::new() },
            relative_to_random: None,
        }
    }

    #[test]
    fn ranks_follow_mean_makespan() {
        let mut rows = vec![
            row("s", "random", 0, Some(10.0)),
            row("s", "greedy", 0, Some(5.0)),
            row("s", "ga", 0, Some(7.0)),
            row("s", "random", 1, Some(20.0)),
            row("s", "greedy", 1, Some(6.0)),
            row("s", "ga", 1, Some(9.0)),
        ];
        fill_relative(&mut rows);
        let agg = aggregate(&rows);
        let rank = |m: &str| agg.iter().find(|a| a.method == m).unwrap().rank.unwrap();
        assert_eq!((rank("greedy"), rank("ga"), rank("random")), (1, 2, 3));
        let greedy = agg.iter().find(|a| a.method == "greedy").unwrap();
        approx::assert_relative_eq!(greedy.mean_relative_to_random.unwrap(), (-0.5 - 0.7) / 2.0);
        let random = agg.iter().find(|a| a.method == "random").unwrap();
        assert_eq!(random.mean_relative_to_random, Some(0.0));
    }

    #[test]
    fn failures_are_excluded_and_flagged() {
        let mut rows = vec![
            row("s", "random", 0, Some(10.0)),
            row("s", "ga", 0, None),
            row("s", "random", 1, Some(10.0)),
            row("s", "ga", 1, Some(8.0)),
        ];
        fill_relative(&mut rows);
        let agg = aggregate(&rows);
        let ga = agg.iter().find(|a| a.method == "ga").unwrap();
        assert_eq!((ga.runs, ga.failed), (2, 1));
        assert_eq!(ga.mean_makespan, Some(8.0));
    }

    #[test]
    fn average_rank_spans_setups() {
        let rows = vec![
            row("a", "x", 0, Some(1.0)),
            row("a", "y", 0, Some(2.0)),
            row("b", "x", 0, Some(3.0)),
            row("b", "y", 0, Some(2.0)),
        ];
        let agg = aggregate(&rows);
        assert!(agg.iter().all(|a| a.average_rank == Some(1.5)));
    }

    #[test]
    fn random_only_experiment_is_zero_relative() {
        let cfg = ExperimentConfig::new(EnvironmentSpec::Preset(GridPreset::Small), &[Method::Random], (0..10).collect(), 1.0);
        let result = run_experiment(&cfg).unwrap();
        assert_eq!(result.rows.len(), 10);
        assert!(result.rows.iter().all(|r| r.relative_to_random == Some(0.0)));
        assert_eq!(result.aggregates[0].mean_relative_to_random, Some(0.0));
    }

    #[test]
    fn outputs_round_trip_and_recompute() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::new(
            EnvironmentSpec::Preset(GridPreset::Tiny),
            &[Method::Random, Method::Greedy, Method::MinExe],
            vec![1, 2],
            0.2,
        );
        cfg.output_dir = Some(dir.path().to_path_buf());
        let result = run_experiment(&cfg).unwrap();
        let rows = read_rows(dir.path().join("raw.csv")).unwrap();
        assert_eq!(rows, result.rows);
        assert_eq!(aggregate(&rows), result.aggregates);
        assert_eq!(read_aggregates(dir.path().join("aggregate.csv")).unwrap(), result.aggregates);
        let header = std::fs::read_to_string(dir.path().join("raw.csv")).unwrap();
        assert!(header.starts_with("setup,method,seed,makespan,wall_time,statuses,degraded,error,relative_to_random\n"));
        assert_eq!(ExperimentConfig::load(dir.path().join("config.json")).unwrap(), cfg);
        let log = std::fs::read_to_string(dir.path().join("logs/budget_0.2__minexe__1.jsonl")).unwrap();
        assert_eq!(log.lines().count(), 1);
    }

    #[test]
    fn deterministic_methods_reproduce() {
        let cfg = ExperimentConfig::new(
            EnvironmentSpec::Preset(GridPreset::Small),
            &[Method::Random, Method::Greedy, Method::Diana],
            vec![3, 4],
            1.0,
        );
        let strip = |r: ExperimentResult| -> Vec<ResultRow> {
            r.rows.into_iter().map(|row| ResultRow { wall_time: 0.0, ..row }).collect()
        };
        assert_eq!(strip(run_experiment(&cfg).unwrap()), strip(run_experiment(&cfg).unwrap()));
    }

    #[test]
    fn degenerate_sweeps_match_single_runs() {
        let cfg = ExperimentConfig::new(EnvironmentSpec::Preset(GridPreset::Small), &[Method::Greedy], vec![1], 2.0);
        let single = run_experiment(&cfg).unwrap();
        let swept = sweep_budget(&cfg, &[2.0]).unwrap();
        assert_eq!(single.rows[0].makespan, swept.rows[0].makespan);
        assert_eq!(single.rows[0].setup, swept.rows[0].setup);
        assert!(sweep_budget(&cfg, &[]).is_err());
        assert!(sweep_iterations(&cfg, &[0], IterationMode::Same).is_err());
    }

    #[test]
    fn config_parse_errors_surface() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, r#"{"environment":{"preset":"small"},"methods":[],"seeds":[1],"budget":1}"#).unwrap();
        assert!(ExperimentConfig::load(&path).is_err());
        std::fs::write(
            &path,
            r#"{"environment":{"preset":"small"},"methods":[{"method":"warp"}],"seeds":[1],"budget":1}"#,
        )
        .unwrap();
        assert!(ExperimentConfig::load(&path).is_err());
        std::fs::write(
            &path,
            r#"{"environment":{"preset":"tiny"},"methods":[{"method":"altermilp"},{"method":"ja+da"}],"seeds":[1],"budget":1}"#,
        )
        .unwrap();
        let cfg = ExperimentConfig::load(&path).unwrap();
        assert_eq!(cfg.methods[1].method, Method::Ablation(crate::altermilp::Ablation::JaDa));
    }
}
