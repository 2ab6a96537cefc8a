// Paired-seed comparison of MinExe and AlterMILP across wall budgets, with
// the CSV tables written to a directory.

use std::path::Path;

use gridopt::baselines::Method;
use gridopt::bench::{sweep_budget, EnvironmentSpec, ExperimentConfig, ExperimentResult};
use gridopt::environment::GridPreset;

pub fn run(budgets: &[f64], seeds: Vec<u64>, out: Option<&Path>) -> gridopt::Result<ExperimentResult> {
    let mut cfg = ExperimentConfig::new(
        EnvironmentSpec::Preset(GridPreset::Small),
        &[Method::Random, Method::MinExe, Method::AlterMilp],
        seeds,
        budgets[0],
    );
    cfg.name = "budget-sweep".into();
    cfg.output_dir = out.map(Path::to_path_buf);

    let result = sweep_budget(&cfg, budgets)?;
    for a in &result.aggregates {
        println!(
            "{:<12} {:<10} mean {:>9.1}  vs random {:>+6.1}%",
            a.setup,
            a.method,
            a.mean_makespan.unwrap_or(f64::NAN),
            100.0 * a.mean_relative_to_random.unwrap_or(f64::NAN)
        );
    }
    Ok(result)
}

#[allow(dead_code)]
fn main() -> gridopt::Result<()> {
    let out = std::env::args().nth(1);
    run(&[0.5, 1.0, 3.0], (0..5).collect(), out.as_deref().map(Path::new)).map(|_| ())
}
