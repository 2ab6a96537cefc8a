// Sample a grid environment from a preset, tweak it, and write it to disk.
//
// ```bash
// cargo run --example generate_environment -- /tmp/env.json
// ```

use gridopt::environment::{generate, GenerationConfig, GridEnvironment, GridPreset};

pub fn run(out: Option<&str>) -> gridopt::Result<GridEnvironment> {
    let mut cfg = GenerationConfig::preset(GridPreset::Small, 42);
    // Stronger skew: a handful of objects are read by most jobs.
    cfg.zipf_exponent = 1.5;
    let env = generate(&cfg)?;

    println!(
        "J={} D={} C={} L={} R={}",
        env.num_jobs(),
        env.num_objects(),
        env.num_cns(),
        env.num_local_sns(),
        env.num_remote_sns()
    );
    for j in 0..env.num_jobs() {
        println!("job {j}: inputs {:?}, {:.0} KB", env.job_inputs(j), env.job_input_size(j));
    }
    let d = env.job_inputs(0)[0];
    println!(
        "object {d}: {:.1} s from its remote host to local SN 0, then {:.1} s on to CN 0",
        env.remote_delay(d, 0)?,
        env.local_delay(d, 0, 0)?
    );

    if let Some(path) = out {
        env.save(path)?;
        assert_eq!(GridEnvironment::load(path)?, env);
        println!("wrote {path}");
    }
    Ok(env)
}

#[allow(dead_code)]
fn main() -> gridopt::Result<()> {
    let out = std::env::args().nth(1);
    run(out.as_deref()).map(|_| ())
}
