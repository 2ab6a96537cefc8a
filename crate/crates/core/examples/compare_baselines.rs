// Run every method on one environment and rank them.

use gridopt::baselines::{run_method, Method, MethodConfig};
use gridopt::environment::{generate, GenerationConfig, GridPreset};

pub fn run(budget: f64) -> gridopt::Result<Vec<(String, f64)>> {
    let env = generate(&GenerationConfig::preset(GridPreset::Small, 1))?;
    let cfg = MethodConfig::new(budget, 1);
    let mut results = Vec::new();
    for method in Method::BASELINES {
        let out = run_method(&env, method, &cfg)?;
        results.push((out.method.name(), out.makespan));
    }
    results.sort_by(|a, b| a.1.total_cmp(&b.1));
    let random = results.iter().find(|(n, _)| n == "random").map_or(f64::NAN, |r| r.1);
    for (rank, (name, m)) in results.iter().enumerate() {
        println!("{:>2}. {name:<10} {m:>10.1} s ({:+.1}% vs random)", rank + 1, 100.0 * (m - random) / random);
    }
    Ok(results)
}

#[allow(dead_code)]
fn main() -> gridopt::Result<()> {
    run(3.0).map(|_| ())
}
