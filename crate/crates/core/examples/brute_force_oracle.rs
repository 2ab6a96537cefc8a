// Enumerate every schedule of a tiny instance and check the monolithic MILP
// finds the same optimum.

use gridopt::environment::{generate, GenerationConfig, GridPreset};
use gridopt::model::build_monolithic;
use gridopt::solver::{brute_force_optimal, candidate_count, solve, OracleLimits, SolveOptions};

pub fn run() -> gridopt::Result<(f64, f64)> {
    let env = generate(&GenerationConfig::preset(GridPreset::Tiny, 5))?;
    println!("{} candidate schedules", candidate_count(&env));

    let (best, m) = brute_force_optimal(&env, &OracleLimits::default())?;
    println!("oracle: {m:.4} s with {best:?}");

    let model = build_monolithic(&env)?;
    println!(
        "monolithic model: {} columns ({} integer), {} rows",
        model.variables().len(),
        model.num_integer(),
        model.constraints().len()
    );
    let r = solve(&model, &SolveOptions::exact(60.0))?;
    println!("MILP:   {:.4} s ({}) in {:.2} s", r.objective, r.status, r.wall_time);
    Ok((m, r.objective))
}

#[allow(dead_code)]
fn main() -> gridopt::Result<()> {
    run().map(|_| ())
}
