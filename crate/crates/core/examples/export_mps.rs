// Write the sub-problems of one schedule as MPS files for external solvers.
//
// ```bash
// cargo run --example export_mps -- /tmp/models
// ```

use std::path::{Path, PathBuf};

use gridopt::altermilp::random_init;
use gridopt::environment::{generate, GenerationConfig, GridPreset};
use gridopt::model::{build_fixed_all, build_fixed_x, build_fixed_yz};

pub fn run(dir: &Path) -> gridopt::Result<Vec<PathBuf>> {
    let env = generate(&GenerationConfig::preset(GridPreset::Small, 0))?;
    let s = random_init(&env, 0);
    std::fs::create_dir_all(dir)?;

    let mut written = Vec::new();
    for (name, mut model) in [
        ("fixed-yz", build_fixed_yz(&env, &s.priority, &s.data_assignment, Some(&s.job_assignment))?),
        ("fixed-x", build_fixed_x(&env, &s.job_assignment, Some((&s.priority, &s.data_assignment)))?),
        ("fixed-all", build_fixed_all(&env, &s)?),
    ] {
        // Warm starts are not part of MPS.
        model.clear_warm_start();
        let path = dir.join(format!("{name}.mps"));
        model.save_mps(&path)?;
        println!(
            "{}: {} columns, {} rows",
            path.display(),
            model.variables().len(),
            model.constraints().len()
        );
        written.push(path);
    }
    Ok(written)
}

#[allow(dead_code)]
fn main() -> gridopt::Result<()> {
    let dir = std::env::args().nth(1).map_or_else(|| std::env::temp_dir().join("gridopt-mps"), PathBuf::from);
    run(&dir).map(|_| ())
}
