use std::collections::BTreeMap;

use addred::engine::{replay_prefix, run_cse};
use addred::io::{parse_scheme, scheme_to_json};
use addred::scheme::Scheme;
use addred::search::{optimize_system, SearchConfig};
use addred::slp::{count_operators, emit_system_slp, stated_additions, StraightLineProgram};
use addred::strategy::{select, ProcessConfig, StrategyKind};
use addred::system::{expand_and_verify, LinearSystem, Sign};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn system_strategy() -> impl Strategy<Value = LinearSystem> {
    (1u32..=10).prop_flat_map(|n_x| {
        prop::collection::vec(prop::collection::vec(-1i8..=1, n_x as usize), 1..=10)
            .prop_map(move |rows| LinearSystem::from_dense_rows(n_x, &rows))
    })
}

fn kind_strategy() -> impl Strategy<Value = StrategyKind> {
    prop::sample::select(StrategyKind::ALL.to_vec())
}

/// Pair counts by enumerating every term pair of every expression.
fn brute_force_counts(sys: &LinearSystem) -> BTreeMap<(u32, u32, i8), u32> {
    let mut counts = BTreeMap::new();
    for e in sys.expressions() {
        let terms = e.sorted_terms();
        for (k, &a) in terms.iter().enumerate() {
            for &b in &terms[k + 1..] {
                let (lo, hi) = if a.abs() < b.abs() { (a, b) } else { (b, a) };
                let sign = if lo.signum() == hi.signum() { 1 } else { -1 };
                *counts
                    .entry((lo.unsigned_abs(), hi.unsigned_abs(), sign))
                    .or_insert(0) += 1;
            }
        }
    }
    counts
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pair_counts_match_enumeration(sys in system_strategy()) {
        let stats = sys.count_pairs();
        let got: BTreeMap<(u32, u32, i8), u32> = stats
            .iter()
            .map(|(q, c)| ((q.i, q.j, q.sign.value() as i8), c))
            .collect();
        prop_assert_eq!(got, brute_force_counts(&sys));
    }

    #[test]
    fn reductions_expand_to_the_input(sys in system_strategy(), kind in kind_strategy(), seed in any::<u64>()) {
        let cfg = ProcessConfig { strategy: kind, seed, ..Default::default() };
        let out = run_cse(sys.clone(), &cfg);
        prop_assert!(expand_and_verify(&sys, &out.system).unwrap());
        prop_assert!(out.record.cost <= sys.naive_cost());
        prop_assert!(!out.system.count_pairs().has_candidate());
        let replayed = replay_prefix(&sys, &out.record.substitutions).unwrap();
        prop_assert_eq!(replayed.total_cost(), out.record.cost);
    }

    #[test]
    fn each_step_saves_frequency_minus_one(sys in system_strategy(), kind in kind_strategy(), seed in any::<u64>()) {
        let cfg = ProcessConfig { strategy: kind, seed, ..Default::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut state = sys;
        loop {
            let stats = state.count_pairs();
            let Some(q) = select(&state, &stats, &cfg, &mut rng) else { break };
            let c = stats.get(&q);
            prop_assert!(c >= 2);
            let before = state.total_cost();
            state.apply_substitution(q).unwrap();
            prop_assert_eq!(before - state.total_cost(), c as usize - 1);
        }
    }

    #[test]
    fn same_seed_same_outcome(sys in system_strategy(), kind in kind_strategy(), seed in any::<u64>()) {
        let cfg = ProcessConfig { strategy: kind, seed, ..Default::default() };
        prop_assert_eq!(run_cse(sys.clone(), &cfg).record, run_cse(sys, &cfg).record);
    }

    #[test]
    fn portfolio_never_beats_its_own_replay(sys in system_strategy(), seed in any::<u64>()) {
        let cfg = SearchConfig { n_processes: Some(8), patience: 2, master_seed: seed, ..Default::default() };
        let out = optimize_system(&sys, &cfg).unwrap();
        let greedy = run_cse(sys.clone(), &ProcessConfig::default()).record.cost;
        prop_assert!(out.best.cost <= greedy);
        let replayed = replay_prefix(&sys, &out.best.substitutions).unwrap();
        prop_assert_eq!(replayed.total_cost(), out.best.cost);
        prop_assert_eq!(out, optimize_system(&sys, &cfg).unwrap());
    }

    #[test]
    fn programs_count_and_expand(sys in system_strategy(), seed in any::<u64>()) {
        let cfg = ProcessConfig { strategy: StrategyKind::GreedyIntersections, seed, ..Default::default() };
        let out = run_cse(sys.clone(), &cfg);
        let text = emit_system_slp(&out.system).to_string();
        prop_assert_eq!(count_operators(&text), out.record.cost);
        prop_assert_eq!(stated_additions(&text), Some(out.record.cost));
        let forms = StraightLineProgram::parse(&text).unwrap().expand();
        for (row, terms) in sys.sorted_expressions().into_iter().enumerate() {
            let expected: BTreeMap<String, i64> = terms
                .into_iter()
                .map(|t| (format!("x{}", t.unsigned_abs()), Sign::of(t).value() as i64))
                .collect();
            prop_assert_eq!(&forms[&format!("e{}", row + 1)], &expected);
        }
    }

    #[test]
    fn flipped_schemes_round_trip_through_json(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = Scheme::kronecker(&Scheme::strassen(), &Scheme::naive(1, 1, 2)).random_flip_default(&mut rng);
        let text = scheme_to_json(&s);
        let parsed = parse_scheme(text.as_bytes()).unwrap();
        prop_assert_eq!(&parsed, &s);
        prop_assert_eq!(scheme_to_json(&parsed), text);
    }
}
