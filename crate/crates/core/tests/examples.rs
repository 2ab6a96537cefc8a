//! Runs each example's entry point with short budgets.

macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }
    };
}

example!(generate_environment);
example!(evaluate_schedule);
example!(altermilp_optimize);
example!(compare_baselines);
example!(brute_force_oracle);
example!(export_mps);
example!(budget_sweep);
example!(iteration_sweep);

#[test]
fn generate_environment_runs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.json");
    let env = generate_environment::run(Some(path.to_str().unwrap())).unwrap();
    assert_eq!(env.num_jobs(), 10);
}

#[test]
fn evaluate_schedule_runs() {
    assert!(evaluate_schedule::run().unwrap() > 0.0);
}

#[test]
fn altermilp_optimize_runs() {
    assert!(altermilp_optimize::run(1.0).unwrap() > 0.0);
}

#[test]
fn compare_baselines_runs() {
    assert_eq!(compare_baselines::run(0.2).unwrap().len(), 8);
}

#[test]
fn brute_force_oracle_runs() {
    let (oracle, milp) = brute_force_oracle::run().unwrap();
    assert!((oracle - milp).abs() <= 1e-9 * oracle);
}

#[test]
fn export_mps_runs() {
    let dir = tempfile::tempdir().unwrap();
    assert!(export_mps::run(dir.path()).unwrap().iter().all(|p| p.exists()));
}

#[test]
fn budget_sweep_runs() {
    let dir = tempfile::tempdir().unwrap();
    let result = budget_sweep::run(&[0.1, 0.2], vec![0], Some(dir.path())).unwrap();
    assert_eq!(result.rows.len(), 6);
    assert!(dir.path().join("raw.csv").exists());
}

#[test]
fn iteration_sweep_runs() {
    assert_eq!(iteration_sweep::run(0.3, &[1, 2], vec![0]).unwrap().len(), 2);
}
