//! Joint job scheduling and data allocation for batch workloads on a grid.
//!
//! The crate models a grid of computational nodes (CNs) fed by two tiers of
//! storage nodes, replays candidate schedules to obtain their makespan, and
//! optimises schedules by alternating between two mixed-integer sub-problems
//! solved with HiGHS. Reference heuristics and an experiment harness sit on
//! top.
//!
//! ```no_run
//! use gridopt::{altermilp, environment::{generate, GenerationConfig, GridPreset}};
//!
//! let env = generate(&GenerationConfig::preset(GridPreset::Small, 1)).unwrap();
//! let (schedule, trace) = altermilp::run(&env, &altermilp::AlterMilpConfig::new(3, 3.0, 1)).unwrap();
//! println!("{} -> {}", trace.steps[0].makespan, trace.final_makespan());
//! # let _ = schedule;
//! ```

pub mod altermilp;
pub mod baselines;
pub mod bench;
pub mod environment;
pub mod error;
pub mod evaluator;
pub mod model;
pub mod schedule;
pub mod solver;

pub use altermilp::{random_init, AlterMilpConfig, OptimizationTrace};
pub use environment::{generate, GenerationConfig, GridEnvironment, GridPreset};
pub use error::{Error, Result};
pub use evaluator::{evaluate, MakespanReport};
pub use schedule::Schedule;
