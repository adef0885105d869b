//! Exhaustive search over substitution sequences, for tiny systems only.
//!
//! States are memoized under a key that renames every variable by its
//! expansion over the base variables, so states reached through different
//! orders (or with differently numbered fresh variables) merge.

use rustc_hash::FxHashMap;

use crate::engine::SolutionRecord;
use crate::strategy::StrategyKind;
use crate::system::{LinearSystem, Sign};

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// Minimum total cost found.
    pub cost: usize,
    pub record: SolutionRecord,
    /// False when the node budget ran out; `cost` is then only an upper bound.
    pub exact: bool,
    pub nodes: usize,
}

type StateKey = Vec<Vec<(u32, i8)>>;

struct Search {
    forms: FxHashMap<Vec<i64>, u32>,
    memo: FxHashMap<StateKey, usize>,
    nodes: usize,
    budget: usize,
    exhausted: bool,
}

impl Search {
    fn key(&mut self, sys: &LinearSystem) -> StateKey {
        let n = sys.n_x() as usize;
        let mut var_forms: Vec<Vec<i64>> = (0..n)
            .map(|i| {
                let mut v = vec![0i64; n];
                v[i] = 1;
                v
            })
            .collect();
        for def in sys.fresh_defs() {
            let s = def.sign.value() as i64;
            let form: Vec<i64> = var_forms[def.i as usize - 1]
                .iter()
                .zip(&var_forms[def.j as usize - 1])
                .map(|(a, b)| a + s * b)
                .collect();
            var_forms.push(form);
        }
        // Interned id and sign of each variable's normalized form.
        let labels: Vec<(u32, i8)> = var_forms
            .into_iter()
            .map(|mut f| {
                let lead = f.iter().find(|&&c| c != 0).copied().unwrap_or(1).signum();
                if lead < 0 {
                    f.iter_mut().for_each(|c| *c = -*c);
                }
                let next = self.forms.len() as u32;
                let id = *self.forms.entry(f).or_insert(next);
                (id, lead as i8)
            })
            .collect();
        let mut key: StateKey = sys
            .expressions()
            .iter()
            .map(|e| {
                let mut terms: Vec<(u32, i8)> = e
                    .sorted_terms()
                    .into_iter()
                    .map(|t| {
                        let (id, s) = labels[t.unsigned_abs() as usize - 1];
                        (id, s * Sign::of(t).value() as i8)
                    })
                    .collect();
                terms.sort_unstable();
                terms
            })
            .collect();
        key.sort_unstable();
        key
    }

    /// Minimum additional cost (fresh definitions still to add plus final
    /// naive cost) reachable from `sys`.
    fn solve(&mut self, sys: &LinearSystem) -> usize {
        let key = self.key(sys);
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let naive = sys.naive_cost();
        if self.nodes >= self.budget {
            self.exhausted = true;
            return naive;
        }
        self.nodes += 1;
        let mut best = naive;
        for (q, _) in sys.count_pairs().candidates() {
            let mut child = sys.clone();
            child.apply_substitution(q).expect("candidate occurs");
            best = best.min(1 + self.solve(&child));
        }
        self.memo.insert(key, best);
        best
    }

    fn value(&mut self, sys: &LinearSystem) -> usize {
        let key = self.key(sys);
        self.memo.get(&key).copied().unwrap_or_else(|| sys.naive_cost())
    }
}

/// Minimum total cost over every sequence of substitutions of pairs with
/// frequency at least 2, searching at most `max_nodes` distinct states.
pub fn brute_force_optimal(sys: &LinearSystem, max_nodes: usize) -> OracleResult {
    let mut search = Search {
        forms: FxHashMap::default(),
        memo: FxHashMap::default(),
        nodes: 0,
        budget: max_nodes,
        exhausted: false,
    };
    let remaining = search.solve(sys);

    let mut state = sys.clone();
    let mut target = remaining;
    while target < state.naive_cost() {
        let next = state
            .count_pairs()
            .candidates()
            .map(|(q, _)| {
                let mut child = state.clone();
                child.apply_substitution(q).expect("candidate occurs");
                child
            })
            .find(|child| 1 + search.value(child) == target)
            .expect("memoized optimum has a witness child");
        state = next;
        target -= 1;
    }
    debug_assert_eq!(state.total_cost(), sys.n_f() as usize + remaining);

    OracleResult {
        cost: state.total_cost(),
        record: SolutionRecord {
            substitutions: state.fresh_defs().to_vec(),
            cost: state.total_cost(),
            strategy: StrategyKind::Greedy,
            seed: 0,
        },
        exact: !search.exhausted,
        nodes: search.nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::replay_prefix;
    use crate::system::expand_and_verify;

    #[test]
    fn worked_example_optimum_is_six() {
        let sys =
            LinearSystem::new(4, vec![vec![1, 2, -3, 4], vec![1, -2, -4], vec![1, -2, -3, 4]]).unwrap();
        let res = brute_force_optimal(&sys, 100_000);
        assert!(res.exact);
        assert_eq!(res.cost, 6);
        let replayed = replay_prefix(&sys, &res.record.substitutions).unwrap();
        assert_eq!(replayed.total_cost(), 6);
        assert!(expand_and_verify(&sys, &replayed).unwrap());
    }

    #[test]
    fn single_pair_costs_one() {
        let sys = LinearSystem::new(2, vec![vec![1, 2]]).unwrap();
        let res = brute_force_optimal(&sys, 1000);
        assert_eq!((res.cost, res.exact), (1, true));
        assert!(res.record.substitutions.is_empty());
    }

    #[test]
    fn disjoint_expressions_stay_naive() {
        let sys = LinearSystem::new(6, vec![vec![1, 2, 3], vec![4, -5, 6]]).unwrap();
        let res = brute_force_optimal(&sys, 1000);
        assert_eq!(res.cost, sys.naive_cost());
    }

    #[test]
    fn tiny_budget_is_flagged() {
        let sys =
            LinearSystem::new(4, vec![vec![1, 2, -3, 4], vec![1, -2, -4], vec![1, -2, -3, 4]]).unwrap();
        let res = brute_force_optimal(&sys, 1);
        assert!(!res.exact);
        assert!(res.cost >= 6 && res.cost <= 8);
    }

    #[test]
    fn longer_chains_are_found() {
        // x1+x2+x3 in three expressions: two definitions cover all of them.
        let sys = LinearSystem::new(4, vec![vec![1, 2, 3], vec![1, 2, 3, 4], vec![1, 2, 3, -4]]).unwrap();
        let res = brute_force_optimal(&sys, 100_000);
        // t1 = x1+x2, t2 = t1+x3, e1 = t2, e2 = t2+x4, e3 = t2-x4
        assert_eq!(res.cost, 4);
    }
}
