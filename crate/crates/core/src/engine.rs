//! One complete reduction of one expression set.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::strategy::{select, ProcessConfig, StrategyKind};
use crate::system::{CanonicalPair, LinearSystem, SystemError};

/// A substitution sequence and the cost it reaches from the pristine system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionRecord {
    pub substitutions: Vec<CanonicalPair>,
    pub cost: usize,
    pub strategy: StrategyKind,
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("substitution {position} ({pair}) cannot be replayed: {source}")]
pub struct ReplayError {
    pub position: usize,
    pub pair: CanonicalPair,
    #[source]
    pub source: SystemError,
}

/// Final state of a reduction together with its record.
#[derive(Clone, Debug)]
pub struct CseOutcome {
    pub record: SolutionRecord,
    pub system: LinearSystem,
}

/// Runs the reduction loop until no pair occurs twice.
///
/// `sys` may already carry fresh variables (a replayed prefix); they are
/// part of the returned record.
pub fn run_cse(sys: LinearSystem, cfg: &ProcessConfig) -> CseOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    run_cse_with(sys, cfg, &mut rng)
}

pub fn run_cse_with(mut sys: LinearSystem, cfg: &ProcessConfig, rng: &mut ChaCha8Rng) -> CseOutcome {
    loop {
        let stats = sys.count_pairs();
        let Some(pair) = select(&sys, &stats, cfg, rng) else {
            break;
        };
        debug_assert!(stats.get(&pair) >= 2);
        sys.apply_substitution(pair)
            .expect("selected pairs occur in the system");
    }
    CseOutcome {
        record: SolutionRecord {
            substitutions: sys.fresh_defs().to_vec(),
            cost: sys.total_cost(),
            strategy: cfg.strategy,
            seed: cfg.seed,
        },
        system: sys,
    }
}

/// Applies `prefix` to a copy of `original` in order.
pub fn replay_prefix(
    original: &LinearSystem,
    prefix: &[CanonicalPair],
) -> Result<LinearSystem, ReplayError> {
    let mut sys = original.clone();
    for (position, &pair) in prefix.iter().enumerate() {
        sys.apply_substitution(pair).map_err(|source| ReplayError {
            position,
            pair,
            source,
        })?;
    }
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::Scheme;
    use crate::system::expand_and_verify;

    fn paper_system() -> LinearSystem {
        LinearSystem::new(4, vec![vec![1, 2, -3, 4], vec![1, -2, -4], vec![1, -2, -3, 4]]).unwrap()
    }

    fn pair(i: u32, j: u32, s: i8) -> CanonicalPair {
        CanonicalPair::try_from((i, j, s)).unwrap()
    }

    #[test]
    fn greedy_on_worked_example() {
        let out = run_cse(paper_system(), &ProcessConfig::default());
        assert!(out.record.cost <= 6);
        assert_eq!(out.record.cost, out.system.total_cost());
        assert!(expand_and_verify(&paper_system(), &out.system).unwrap());
    }

    #[test]
    fn strassen_u_has_nothing_to_share() {
        let [eu, _, _] = Scheme::strassen().extract_systems();
        let out = run_cse(eu, &ProcessConfig::default());
        assert!(out.record.substitutions.is_empty());
        assert_eq!(out.record.cost, 5);
    }

    #[test]
    fn identical_expressions_share_one_addition() {
        let sys = LinearSystem::new(2, vec![vec![1, 2], vec![1, 2]]).unwrap();
        let out = run_cse(sys, &ProcessConfig::default());
        assert_eq!(out.record.substitutions, vec![pair(1, 2, 1)]);
        assert_eq!(out.record.cost, 1);
    }

    #[test]
    fn empty_system_costs_nothing() {
        let out = run_cse(LinearSystem::new(3, vec![]).unwrap(), &ProcessConfig::default());
        assert_eq!(out.record.cost, 0);
        assert!(out.record.substitutions.is_empty());
    }

    #[test]
    fn replay_examples() {
        let sys = paper_system();
        assert_eq!(replay_prefix(&sys, &[]).unwrap(), sys);
        let partial = replay_prefix(&sys, &[pair(2, 4, 1)]).unwrap();
        assert_eq!(partial.fresh_defs(), &[pair(2, 4, 1)]);
        assert_eq!(
            partial.sorted_expressions(),
            vec![vec![1, -3, 5], vec![1, -5], vec![1, -2, -3, 4]]
        );
        let out = run_cse(sys.clone(), &ProcessConfig::default());
        let full = replay_prefix(&sys, &out.record.substitutions).unwrap();
        assert_eq!(full.total_cost(), out.record.cost);
    }

    #[test]
    fn unreplayable_prefix_names_position() {
        let err = replay_prefix(&paper_system(), &[pair(2, 4, 1), pair(2, 4, 1)]).unwrap_err();
        assert_eq!(err.position, 1);
    }

    #[test]
    fn continuation_keeps_prefix_in_record() {
        let sys = paper_system();
        let partial = replay_prefix(&sys, &[pair(1, 3, -1)]).unwrap();
        let out = run_cse(partial, &ProcessConfig::default());
        assert_eq!(out.record.substitutions[0], pair(1, 3, -1));
        assert!(expand_and_verify(&sys, &out.system).unwrap());
    }

    #[test]
    fn same_seed_same_record() {
        let sys = paper_system();
        for kind in StrategyKind::ALL {
            let cfg = ProcessConfig {
                strategy: kind,
                seed: 99,
                ..Default::default()
            };
            assert_eq!(run_cse(sys.clone(), &cfg).record, run_cse(sys.clone(), &cfg).record);
        }
    }
}
