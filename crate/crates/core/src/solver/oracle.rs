use itertools::Itertools;

use crate::environment::GridEnvironment;
use crate::error::{Error, Result};
use crate::evaluator::makespan_of;
use crate::schedule::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_candidates: u128,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_candidates: 1_000_000,
        }
    }
}

/// `C^J * J! * L^D`, saturating.
pub fn candidate_count(env: &GridEnvironment) -> u128 {
    let pow = |base: usize, exp: usize| {
        (0..exp).try_fold(1u128, |acc, _| acc.checked_mul(base as u128))
    };
    let factorial = (1..=env.num_jobs()).try_fold(1u128, |acc, k| acc.checked_mul(k as u128));
    pow(env.num_cns(), env.num_jobs())
        .zip(factorial)
        .zip(pow(env.num_local_sns(), env.num_objects()))
        .and_then(|((x, y), z)| x.checked_mul(y)?.checked_mul(z))
        .unwrap_or(u128::MAX)
}

/// Exhaustive search over every `(X, priority, Z)`. Ties keep the
/// lexicographically smallest candidate.
pub fn brute_force_optimal(env: &GridEnvironment, limits: &OracleLimits) -> Result<(Schedule, f64)> {
    let candidates = candidate_count(env);
    if candidates > limits.max_candidates {
        return Err(Error::TooLarge {
            candidates,
            limit: limits.max_candidates,
        });
    }
    let (jobs, cns, objects, locals) = (env.num_jobs(), env.num_cns(), env.num_objects(), env.num_local_sns());
    let data_assignments: Vec<Vec<usize>> = (0..objects).map(|_| 0..locals).multi_cartesian_product().collect();
    let priorities: Vec<Vec<usize>> = (0..jobs).permutations(jobs).collect();

    let mut best: Option<(Schedule, f64)> = None;
    let mut probe = Schedule::new(vec![0; jobs], (0..jobs).collect(), vec![0; objects]);
    for x in (0..jobs).map(|_| 0..cns).multi_cartesian_product() {
        probe.job_assignment = x;
        for p in &priorities {
            probe.priority.clone_from(p);
            for z in &data_assignments {
                probe.data_assignment.clone_from(z);
                let m = makespan_of(env, &probe);
                if best.as_ref().is_none_or(|(_, b)| m < *b) {
                    best = Some((probe.clone(), m));
                }
            }
        }
    }
    Ok(best.expect("every dimension is positive"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::altermilp::random_init;
    use crate::environment::{generate, GenerationConfig, GridPreset};
    use crate::evaluator::evaluate;
    use crate::evaluator::tests::staged_object_env;

    #[test]
    fn single_candidate() {
        let env = staged_object_env(1);
        assert_eq!(candidate_count(&env), 1);
        let (s, m) = brute_force_optimal(&env, &OracleLimits::default()).unwrap();
        assert_eq!(s, Schedule::new(vec![0], vec![0], vec![0]));
        assert_eq!(m, 13.0);
    }

    #[test]
    fn tiny_counts_384() {
        let env = generate(&GenerationConfig::preset(GridPreset::Tiny, 0)).unwrap();
        assert_eq!(candidate_count(&env), 384);
    }

    #[test]
    fn refuses_large_instances() {
        let env = generate(&GenerationConfig::preset(GridPreset::Small, 0)).unwrap();
        match brute_force_optimal(&env, &OracleLimits::default()) {
            Err(Error::TooLarge { candidates, limit }) => {
                assert!(candidates > limit);
                assert_eq!(limit, 1_000_000);
            }
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn dominates_random_schedules_and_is_deterministic() {
        for seed in 0..3 {
            let env = generate(&GenerationConfig::preset(GridPreset::Tiny, seed)).unwrap();
            let (s, m) = brute_force_optimal(&env, &OracleLimits::default()).unwrap();
            assert_eq!(evaluate(&env, &s).unwrap().makespan, m);
            for k in 0..100 {
                assert!(m <= evaluate(&env, &random_init(&env, k)).unwrap().makespan);
            }
            assert_eq!(brute_force_optimal(&env, &OracleLimits::default()).unwrap().0, s);
        }
    }

    #[test]
    fn ties_break_lexicographically() {
        // One job, two identical CNs: candidate X = [0] comes first.
        let env = GridEnvironment::new(
            vec![1024.0],
            vec![100.0, 100.0],
            1.0,
            vec![vec![1024.0, 1024.0]],
            vec![vec![1024.0, 1024.0], vec![1024.0, 1024.0]],
            vec![0],
            vec![vec![0]],
        )
        .unwrap();
        let (s, _) = brute_force_optimal(&env, &OracleLimits::default()).unwrap();
        assert_eq!(s, Schedule::new(vec![0], vec![0], vec![0]));
    }
}
