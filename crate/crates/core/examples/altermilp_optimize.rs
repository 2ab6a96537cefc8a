// Alternate between the job-assignment and the order/placement MILPs and
// print the trace.

use gridopt::altermilp::{run as alter, AlterMilpConfig, SplitPolicy};
use gridopt::environment::{generate, GenerationConfig, GridPreset};
use gridopt::evaluator::evaluate;

pub fn run(budget: f64) -> gridopt::Result<f64> {
    let env = generate(&GenerationConfig::preset(GridPreset::Small, 3))?;
    let mut cfg = AlterMilpConfig::new(3, budget, 3);
    cfg.split = SplitPolicy::FrontLoaded;

    let (schedule, trace) = alter(&env, &cfg)?;
    for step in &trace.steps {
        println!(
            "iter {} {:?}: {:.1} s makespan, budget {:.2} s, status {}",
            step.iteration,
            step.kind,
            step.makespan,
            step.budget,
            step.status.map_or("-".to_string(), |s| s.to_string())
        );
    }
    println!("stopped: {:?} after {:.2} s", trace.stop_reason, trace.total_wall_time);
    let m = evaluate(&env, &schedule)?.makespan;
    assert_eq!(m, trace.final_makespan());
    Ok(m)
}

#[allow(dead_code)]
fn main() -> gridopt::Result<()> {
    run(6.0).map(|_| ())
}
