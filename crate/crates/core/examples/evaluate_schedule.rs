// Build a schedule by hand and replay it through the simulator.

use gridopt::environment::GridEnvironment;
use gridopt::evaluator::evaluate;
use gridopt::schedule::Schedule;

pub fn run() -> gridopt::Result<f64> {
    // Two objects, two jobs, two CNs, one local SN, one remote SN.
    let env = GridEnvironment::new(
        vec![1000.0, 2000.0],
        vec![100.0, 50.0],
        1.0,
        vec![vec![100.0]],
        vec![vec![1000.0, 500.0]],
        vec![0, 0],
        vec![vec![0], vec![0, 1]],
    )?;

    // Both jobs on CN 0, job 1 first.
    let serial = Schedule::new(vec![0, 0], vec![1, 0], vec![0, 0]);
    // Job 1 moved to the slower CN.
    let spread = Schedule::new(vec![0, 1], vec![1, 0], vec![0, 0]);

    let mut best = f64::INFINITY;
    for (name, s) in [("serial", &serial), ("spread", &spread)] {
        let report = evaluate(&env, s)?;
        println!("{name}: makespan {:.2} s", report.makespan);
        for t in &report.jobs {
            println!(
                "  job {} on CN {}: queued {:.2}, inputs ready {:.2}, done {:.2}",
                t.job, t.cn, t.start, t.exec_start, t.completion
            );
        }
        best = best.min(report.makespan);
    }
    println!("{}", serial.to_json()?);
    Ok(best)
}

#[allow(dead_code)]
fn main() -> gridopt::Result<()> {
    run().map(|_| ())
}
