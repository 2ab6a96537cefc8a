//! Genetic search over `(job assignment, priority, data assignment)`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::altermilp::random_init;
use crate::environment::GridEnvironment;
use crate::error::{Error, Result};
use crate::evaluator::makespan_of;
use crate::schedule::Schedule;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub tournament: usize,
    /// Per-gene probability; `None` means one over the genome length.
    pub mutation_rate: Option<f64>,
    pub crossover_rate: f64,
    pub elitism: usize,
    pub max_generations: usize,
    /// Seconds.
    pub budget: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population: 50,
            tournament: 3,
            mutation_rate: None,
            crossover_rate: 0.9,
            elitism: 1,
            max_generations: 100_000,
            budget: 3.0,
            seed: 0,
        }
    }
}

impl GaConfig {
    fn validate(&self) -> Result<()> {
        if self.population < 2 {
            return Err(Error::Config("GA population must be at least 2".into()));
        }
        if self.tournament == 0 || self.elitism >= self.population {
            return Err(Error::Config("GA needs tournament >= 1 and elitism < population".into()));
        }
        if let Some(rate) = self.mutation_rate {
            if !(0.0..=1.0).contains(&rate) {
                return Err(Error::Config("mutation rate must lie in [0, 1]".into()));
            }
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) || !(self.budget > 0.0) {
            return Err(Error::Config("crossover rate must lie in [0, 1] and budget be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaReport {
    pub best: Schedule,
    pub best_makespan: f64,
    /// Best makespan seen after each generation, starting with generation 0.
    pub history: Vec<f64>,
}

pub fn ga(env: &GridEnvironment, config: &GaConfig) -> Result<GaReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initial = (0..config.population).map(|_| random_init(env, rng.random())).collect();
    ga_from(env, config, initial)
}

/// Evolves the given starting population.
pub fn ga_from(env: &GridEnvironment, config: &GaConfig, initial: Vec<Schedule>) -> Result<GaReport> {
    config.validate()?;
    if initial.len() != config.population {
        return Err(Error::Config(format!(
            "initial population has {} members, expected {}",
            initial.len(),
            config.population
        )));
    }
    for s in &initial {
        s.validate(env)?;
    }
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);
    let genome = 2 * env.num_jobs() + env.num_objects();
    let rate = config.mutation_rate.unwrap_or(1.0 / genome as f64);

    let mut population: Vec<(Schedule, f64)> = initial
        .into_iter()
        .map(|s| {
            let m = makespan_of(env, &s);
            (s, m)
        })
        .collect();
    let mut best = population
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .cloned()
        .unwrap();
    let mut history = vec![best.1];

    for _ in 0..config.max_generations {
        if started.elapsed().as_secs_f64() >= config.budget {
            break;
        }
        population.sort_by(|a, b| a.1.total_cmp(&b.1));
        let mut next: Vec<(Schedule, f64)> = population[..config.elitism].to_vec();
        while next.len() < config.population {
            let a = tournament(&population, config.tournament, &mut rng);
            let b = tournament(&population, config.tournament, &mut rng);
            let mut child = if rng.random::<f64>() < config.crossover_rate {
                crossover(a, b, &mut rng)
            } else {
                a.clone()
            };
            mutate(env, &mut child, rate, &mut rng);
            let m = makespan_of(env, &child);
            next.push((child, m));
        }
        population = next;
        if let Some(gen_best) = population.iter().min_by(|a, b| a.1.total_cmp(&b.1)) {
            if gen_best.1 < best.1 {
                best = gen_best.clone();
            }
        }
        history.push(best.1);
    }
    Ok(GaReport {
        best: best.0,
        best_makespan: best.1,
        history,
    })
}

fn tournament<'a>(population: &'a [(Schedule, f64)], size: usize, rng: &mut impl Rng) -> &'a Schedule {
    (0..size)
        .map(|_| &population[rng.random_range(0..population.len())])
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(s, _)| s)
        .unwrap()
}

fn one_point(a: &[usize], b: &[usize], rng: &mut impl Rng) -> Vec<usize> {
    let cut = rng.random_range(0..=a.len());
    a[..cut].iter().chain(&b[cut..]).copied().collect()
}

/// Order crossover: a slice of `a` kept in place, the rest filled in `b`'s order.
fn order_crossover(a: &[usize], b: &[usize], rng: &mut impl Rng) -> Vec<usize> {
    let n = a.len();
    let (mut lo, mut hi) = (rng.random_range(0..n), rng.random_range(0..n));
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let mut taken = vec![false; n];
    for &g in &a[lo..=hi] {
        taken[g] = true;
    }
    let mut fill = b.iter().copied().filter(|&g| !taken[g]);
    (0..n)
        .map(|k| if (lo..=hi).contains(&k) { a[k] } else { fill.next().unwrap() })
        .collect()
}

fn crossover(a: &Schedule, b: &Schedule, rng: &mut impl Rng) -> Schedule {
    Schedule::new(
        one_point(&a.job_assignment, &b.job_assignment, rng),
        order_crossover(&a.priority, &b.priority, rng),
        one_point(&a.data_assignment, &b.data_assignment, rng),
    )
}

fn mutate(env: &GridEnvironment, s: &mut Schedule, rate: f64, rng: &mut impl Rng) {
    if rate == 0.0 {
        return;
    }
    for c in &mut s.job_assignment {
        if rng.random::<f64>() < rate {
            *c = rng.random_range(0..env.num_cns());
        }
    }
    let n = s.priority.len();
    for k in 0..n {
        if rng.random::<f64>() < rate {
            s.priority.swap(k, rng.random_range(0..n));
        }
    }
    for l in &mut s.data_assignment {
        if rng.random::<f64>() < rate {
            *l = rng.random_range(0..env.num_local_sns());
        }
    }
}
