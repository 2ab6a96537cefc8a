use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use gridopt::altermilp::SplitPolicy;
use gridopt::baselines::{run_method, Method, MethodConfig};
use gridopt::bench::{self, ExperimentConfig, ExperimentResult, IterationMode};
use gridopt::environment::{generate, GenerationConfig, GridEnvironment, GridPreset};
use gridopt::evaluator::evaluate;
use gridopt::model::{build_fixed_all, build_fixed_x, build_fixed_yz, build_monolithic};
use gridopt::schedule::Schedule;

#[derive(Parser)]
#[command(name = "gridopt", version, about = "Joint job scheduling and data allocation on a simulated grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample an environment document.
    Gen(GenArgs),
    /// Replay a schedule and report its makespan.
    Evaluate {
        #[arg(long)]
        env: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
        /// Print the full report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Produce a schedule with one of the methods.
    Optimize(OptimizeArgs),
    /// Write one of the MILP models in free MPS format.
    ExportMps {
        #[arg(long)]
        env: PathBuf,
        #[arg(long, value_enum)]
        kind: ModelKind,
        /// Source of the fixed blocks; required except for `monolithic`.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run an experiment from a JSON config, or one of the sweeps.
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(subcommand)]
        sweep: Option<Sweep>,
    },
}

#[derive(clap::Args)]
struct GenArgs {
    #[arg(long, default_value = "small")]
    preset: GridPreset,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    objects: Option<usize>,
    #[arg(long)]
    cns: Option<usize>,
    #[arg(long)]
    local_sns: Option<usize>,
    #[arg(long)]
    remote_sns: Option<usize>,
    #[arg(long)]
    zipf: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

#[derive(clap::Args)]
struct OptimizeArgs {
    #[arg(long)]
    env: PathBuf,
    #[arg(long, default_value = "altermilp")]
    method: Method,
    #[arg(long, default_value_t = 3)]
    iters: usize,
    /// Seconds.
    #[arg(long, default_value_t = 3.0)]
    budget: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Split::Equal)]
    split: Split,
    /// Run every iteration even when nothing improves.
    #[arg(long)]
    no_early_stop: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the optimisation trace (altermilp variants only).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Split {
    Equal,
    FrontLoaded,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    FixedYz,
    FixedX,
    FixedAll,
    Monolithic,
}

#[derive(Subcommand)]
enum Sweep {
    /// Same experiment at several budgets.
    SweepBudget {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated seconds.
        #[arg(long, value_delimiter = ',', required = true)]
        budgets: Vec<f64>,
    },
    /// Same experiment at several iteration counts.
    SweepIters {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        iters: Vec<usize>,
        #[arg(long, default_value = "divided")]
        mode: IterationMode,
    },
}

fn load_env(path: &PathBuf) -> anyhow::Result<GridEnvironment> {
    GridEnvironment::load(path).with_context(|| format!("reading environment {}", path.display()))
}

fn load_schedule(path: &PathBuf) -> anyhow::Result<Schedule> {
    Schedule::load(path).with_context(|| format!("reading schedule {}", path.display()))
}

fn print_aggregates(result: &ExperimentResult) {
    println!("{:<14} {:<22} {:>5} {:>12} {:>10} {:>6}", "setup", "method", "runs", "makespan", "vs-random", "rank");
    for a in &result.aggregates {
        let fmt = |v: Option<f64>, scale: f64| v.map_or("-".to_string(), |x| format!("{:.2}", x * scale));
        println!(
            "{:<14} {:<22} {:>5} {:>12} {:>9}% {:>6}",
            a.setup,
            a.method,
            a.runs - a.failed,
            fmt(a.mean_makespan, 1.0),
            fmt(a.mean_relative_to_random, 100.0),
            a.rank.map_or("-".into(), |r| r.to_string())
        );
    }
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Gen(args) => {
            let mut cfg = GenerationConfig::preset(args.preset, args.seed);
            let dims = &mut cfg.dimensions;
            if let Some(v) = args.jobs {
                dims.num_jobs = v;
            }
            if let Some(v) = args.objects {
                dims.num_objects = v;
            }
            if let Some(v) = args.cns {
                dims.num_cns = v;
            }
            if let Some(v) = args.local_sns {
                dims.num_local_sns = v;
            }
            if let Some(v) = args.remote_sns {
                dims.num_remote_sns = v;
            }
            if args.jobs.is_some() || args.objects.is_some() {
                let d = *dims;
                cfg.objects_per_job_range = GenerationConfig::with_dimensions(d, args.seed).objects_per_job_range;
            }
            if let Some(z) = args.zipf {
                cfg.zipf_exponent = z;
            }
            if let Some(g) = args.gamma {
                cfg.gamma = g;
            }
            let env = generate(&cfg)?;
            env.save(&args.out)?;
            println!(
                "wrote {} (J={}, D={}, C={}, L={}, R={})",
                args.out.display(),
                env.num_jobs(),
                env.num_objects(),
                env.num_cns(),
                env.num_local_sns(),
                env.num_remote_sns()
            );
        }
        Command::Evaluate { env, schedule, json } => {
            let env = load_env(&env)?;
            let schedule = load_schedule(&schedule)?;
            let report = evaluate(&env, &schedule)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                println!("makespan {:.6}", report.makespan);
                for t in &report.jobs {
                    println!(
                        "job {:>3} cn {:>3} start {:>12.3} exec {:>12.3} done {:>12.3}",
                        t.job, t.cn, t.start, t.exec_start, t.completion
                    );
                }
            }
        }
        Command::Optimize(args) => {
            let env = load_env(&args.env)?;
            let mut cfg = MethodConfig::new(args.budget, args.seed);
            cfg.iterations = args.iters;
            cfg.altermilp.split = match args.split {
                Split::Equal => SplitPolicy::EqualSplit,
                Split::FrontLoaded => SplitPolicy::FrontLoaded,
            };
            cfg.altermilp.early_stop = !args.no_early_stop;
            let out = run_method(&env, args.method, &cfg)?;
            println!(
                "{} makespan {:.6} in {:.3}s{}",
                out.method,
                out.makespan,
                out.wall_time,
                if out.degraded { " (degraded)" } else { "" }
            );
            if let Some(path) = &args.out {
                out.schedule.save(path)?;
            }
            match (&args.trace, &out.trace) {
                (Some(path), Some(trace)) => trace.save(path)?,
                (Some(_), None) => log::warn!("{} produces no trace", out.method),
                _ => {}
            }
        }
        Command::ExportMps { env, kind, schedule, out } => {
            let env = load_env(&env)?;
            let schedule = schedule.as_ref().map(load_schedule).transpose()?;
            let need = || schedule.clone().context("--schedule is required for this model kind");
            let model = match kind {
                ModelKind::Monolithic => build_monolithic(&env)?,
                ModelKind::FixedAll => build_fixed_all(&env, &need()?)?,
                ModelKind::FixedYz => {
                    let s = need()?;
                    build_fixed_yz(&env, &s.priority, &s.data_assignment, Some(&s.job_assignment))?
                }
                ModelKind::FixedX => {
                    let s = need()?;
                    build_fixed_x(&env, &s.job_assignment, Some((&s.priority, &s.data_assignment)))?
                }
            };
            model.save_mps(&out)?;
            println!(
                "wrote {} ({} columns, {} rows, {} integer)",
                out.display(),
                model.variables().len(),
                model.constraints().len(),
                model.num_integer()
            );
        }
        Command::Bench { config, sweep } => {
            let result = match (config, sweep) {
                (Some(path), None) => bench::run_experiment(&ExperimentConfig::load(path)?)?,
                (None, Some(Sweep::SweepBudget { config, budgets })) => {
                    bench::sweep_budget(&ExperimentConfig::load(config)?, &budgets)?
                }
                (None, Some(Sweep::SweepIters { config, iters, mode })) => {
                    bench::sweep_iterations(&ExperimentConfig::load(config)?, &iters, mode)?
                }
                _ => bail!("pass either --config FILE or one sweep subcommand"),
            };
            print_aggregates(&result);
        }
    }
    Ok(())
}
