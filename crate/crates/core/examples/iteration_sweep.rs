// How the number of alternations trades against time per sub-solve.

use gridopt::baselines::Method;
use gridopt::bench::{sweep_iterations, EnvironmentSpec, ExperimentConfig, ExperimentResult, IterationMode};
use gridopt::environment::GridPreset;

pub fn run(budget: f64, iterations: &[usize], seeds: Vec<u64>) -> gridopt::Result<Vec<ExperimentResult>> {
    let cfg = ExperimentConfig::new(
        EnvironmentSpec::Preset(GridPreset::Small),
        &[Method::Random, Method::AlterMilp],
        seeds,
        budget,
    );
    let mut results = Vec::new();
    // Divided: one total budget shared by all iterations.
    // Same: every iteration gets as much time as one of three did.
    for mode in [IterationMode::Divided, IterationMode::Same] {
        let result = sweep_iterations(&cfg, iterations, mode)?;
        for &t in iterations {
            let setup = format!("T={t}");
            println!(
                "{mode:?} {setup}: AlterMILP mean {:.1}",
                result.mean_makespan(&setup, Method::AlterMilp).unwrap_or(f64::NAN)
            );
        }
        results.push(result);
    }
    Ok(results)
}

#[allow(dead_code)]
fn main() -> gridopt::Result<()> {
    run(3.0, &[1, 2, 3, 5], (0..3).collect()).map(|_| ())
}
