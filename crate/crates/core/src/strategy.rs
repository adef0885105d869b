//! Pair-selection strategies.
//!
//! Every selector returns `None` when no pair occurs at least twice, which
//! ends a reduction.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::system::{canonicalize_unchecked, CanonicalPair, LinearSystem, PairStats};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Greedy,
    GreedyAlternative,
    WeightedRandom,
    GreedyRandom,
    GreedyIntersections,
    Mixed,
    GreedyPotential,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 7] = [
        StrategyKind::Greedy,
        StrategyKind::GreedyAlternative,
        StrategyKind::WeightedRandom,
        StrategyKind::GreedyRandom,
        StrategyKind::GreedyIntersections,
        StrategyKind::Mixed,
        StrategyKind::GreedyPotential,
    ];

    pub fn code(self) -> &'static str {
        match self {
            StrategyKind::Greedy => "g",
            StrategyKind::GreedyAlternative => "ga",
            StrategyKind::WeightedRandom => "wr",
            StrategyKind::GreedyRandom => "gr",
            StrategyKind::GreedyIntersections => "gi",
            StrategyKind::Mixed => "mix",
            StrategyKind::GreedyPotential => "gp",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Greedy => "greedy",
            StrategyKind::GreedyAlternative => "greedy_alternative",
            StrategyKind::WeightedRandom => "weighted_random",
            StrategyKind::GreedyRandom => "greedy_random",
            StrategyKind::GreedyIntersections => "greedy_intersections",
            StrategyKind::Mixed => "mixed",
            StrategyKind::GreedyPotential => "greedy_potential",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    /// Accepts the short code (`gi`) or the full name (`greedy_intersections`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.code() == s || k.name() == s)
            .ok_or_else(|| format!("unknown strategy '{s}'"))
    }
}

/// Sub-strategy weights used by [`StrategyKind::Mixed`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixWeights {
    pub gi: f64,
    pub ga: f64,
    pub gr: f64,
    pub wr: f64,
}

impl Default for MixWeights {
    fn default() -> Self {
        MixWeights {
            gi: 8.0,
            ga: 4.0,
            gr: 2.0,
            wr: 1.0,
        }
    }
}

impl MixWeights {
    /// Draws the sub-strategy for one selection step.
    pub fn pick<R: Rng>(&self, rng: &mut R) -> StrategyKind {
        const KINDS: [StrategyKind; 4] = [
            StrategyKind::GreedyIntersections,
            StrategyKind::GreedyAlternative,
            StrategyKind::GreedyRandom,
            StrategyKind::WeightedRandom,
        ];
        let dist = WeightedIndex::new([self.gi, self.ga, self.gr, self.wr])
            .expect("mixed weights must be non-negative with a positive sum");
        KINDS[dist.sample(rng)]
    }
}

/// Parameters of one reduction process.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProcessConfig {
    pub strategy: StrategyKind,
    /// Look-ahead weight for greedy-intersections and greedy-potential, in `[0, 0.5]`.
    pub alpha: f64,
    /// Survival weight for intersecting pairs, in `[0.5, 1]`.
    pub beta: f64,
    /// Probability that greedy-random exploits, in `(0.5, 1)`.
    pub p_greedy: f64,
    pub seed: u64,
    pub mix: MixWeights,
}

impl Default for ProcessConfig {
    fn default() -> Self {
        ProcessConfig {
            strategy: StrategyKind::Greedy,
            alpha: 0.25,
            beta: 0.75,
            p_greedy: 0.75,
            seed: 0,
            mix: MixWeights::default(),
        }
    }
}

impl ProcessConfig {
    pub fn with_strategy(strategy: StrategyKind) -> Self {
        ProcessConfig {
            strategy,
            ..Default::default()
        }
    }
}

/// Dispatches to the selector for `cfg.strategy`.
pub fn select<R: Rng>(
    sys: &LinearSystem,
    stats: &PairStats,
    cfg: &ProcessConfig,
    rng: &mut R,
) -> Option<CanonicalPair> {
    match cfg.strategy {
        StrategyKind::Greedy => select_greedy(stats),
        StrategyKind::GreedyAlternative => select_greedy_alternative(stats, rng),
        StrategyKind::WeightedRandom => select_weighted_random(stats, rng),
        StrategyKind::GreedyRandom => select_greedy_random(stats, cfg, rng),
        StrategyKind::GreedyIntersections => select_greedy_intersections(stats, cfg, rng),
        StrategyKind::Mixed => select_mixed(stats, cfg, rng),
        StrategyKind::GreedyPotential => select_greedy_potential(sys, stats, cfg.alpha),
    }
}

/// Highest frequency; ties go to the smallest pair.
pub fn select_greedy(stats: &PairStats) -> Option<CanonicalPair> {
    let mut best: Option<(CanonicalPair, u32)> = None;
    for (q, c) in stats.candidates() {
        if best.map_or(true, |(_, bc)| c > bc) {
            best = Some((q, c));
        }
    }
    best.map(|(q, _)| q)
}

/// Uniform choice among the maximum-frequency pairs.
pub fn select_greedy_alternative<R: Rng>(stats: &PairStats, rng: &mut R) -> Option<CanonicalPair> {
    let max = stats.max_frequency();
    if max < 2 {
        return None;
    }
    let top: Vec<CanonicalPair> = stats
        .candidates()
        .filter(|&(_, c)| c == max)
        .map(|(q, _)| q)
        .collect();
    Some(top[rng.gen_range(0..top.len())])
}

/// Draws a pair with probability proportional to its profit `c - 1`.
pub fn select_weighted_random<R: Rng>(stats: &PairStats, rng: &mut R) -> Option<CanonicalPair> {
    let total: u64 = stats.candidates().map(|(_, c)| (c - 1) as u64).sum();
    if total == 0 {
        return None;
    }
    let mut ticket = rng.gen_range(0..total);
    for (q, c) in stats.candidates() {
        let profit = (c - 1) as u64;
        if ticket < profit {
            return Some(q);
        }
        ticket -= profit;
    }
    unreachable!("ticket below total profit")
}

pub fn select_greedy_random<R: Rng>(
    stats: &PairStats,
    cfg: &ProcessConfig,
    rng: &mut R,
) -> Option<CanonicalPair> {
    if rng.gen_bool(cfg.p_greedy.clamp(0.0, 1.0)) {
        select_greedy_alternative(stats, rng)
    } else {
        select_weighted_random(stats, rng)
    }
}

/// True when the pairs share a variable index, regardless of signs.
pub fn pairs_intersect(a: &CanonicalPair, b: &CanonicalPair) -> bool {
    a.shares_variable(b)
}

/// Candidate pairs (frequency >= 2) with a variable -> candidate index.
struct CandidateIndex {
    pairs: Vec<(CanonicalPair, u32)>,
    by_var: FxHashMap<u32, Vec<usize>>,
    total_profit: u64,
}

impl CandidateIndex {
    fn new(stats: &PairStats) -> Self {
        let pairs: Vec<_> = stats.candidates().collect();
        let mut by_var: FxHashMap<u32, Vec<usize>> = FxHashMap::default();
        for (idx, (q, _)) in pairs.iter().enumerate() {
            by_var.entry(q.i).or_default().push(idx);
            by_var.entry(q.j).or_default().push(idx);
        }
        let total_profit = pairs.iter().map(|&(_, c)| (c - 1) as u64).sum();
        CandidateIndex {
            pairs,
            by_var,
            total_profit,
        }
    }

    /// Stochastic look-ahead score of candidate `at`.
    ///
    /// Pairs of frequency 1 contribute nothing in either branch, so only
    /// candidates are visited. Intersecting candidates are visited in pair
    /// order, one coin each.
    fn score<R: Rng>(&self, at: usize, cfg: &ProcessConfig, rng: &mut R) -> f64 {
        let (q, c) = self.pairs[at];
        let gain = (c - 1) as u64;
        let empty = Vec::new();
        let left = self.by_var.get(&q.i).unwrap_or(&empty);
        let right = self.by_var.get(&q.j).unwrap_or(&empty);
        let mut intersecting = 0u64;
        let mut survived = 0u64;
        let (mut a, mut b) = (0, 0);
        while a < left.len() || b < right.len() {
            let s = match (left.get(a), right.get(b)) {
                (Some(&x), Some(&y)) if x == y => {
                    a += 1;
                    b += 1;
                    x
                }
                (Some(&x), Some(&y)) if x < y => {
                    a += 1;
                    x
                }
                (Some(_), Some(&y)) => {
                    b += 1;
                    y
                }
                (Some(&x), None) => {
                    a += 1;
                    x
                }
                (None, Some(&y)) => {
                    b += 1;
                    y
                }
                (None, None) => unreachable!(),
            };
            if s == at {
                continue;
            }
            let profit = (self.pairs[s].1 - 1) as u64;
            intersecting += profit;
            if rng.gen_bool(0.5) {
                survived += profit;
            }
        }
        let disjoint = self.total_profit - gain - intersecting;
        gain as f64 + cfg.alpha * (disjoint as f64 + cfg.beta * survived as f64)
    }
}

/// `H(q) = (c_q - 1) + alpha * sum over s != q of I(q, s)`, where `I` is
/// `c_s - 1` for pairs disjoint from `q` and, for intersecting pairs, `0` or
/// `beta * (c_s - 1)` with equal probability.
pub fn score_intersections<R: Rng>(
    q: &CanonicalPair,
    stats: &PairStats,
    cfg: &ProcessConfig,
    rng: &mut R,
) -> f64 {
    let index = CandidateIndex::new(stats);
    match index.pairs.binary_search_by(|(p, _)| p.cmp(q)) {
        Ok(at) => index.score(at, cfg, rng),
        // Not a candidate: no gain, and its variables still count as intersecting.
        Err(_) => {
            let mut sum = 0.0;
            for &(s, c) in &index.pairs {
                let profit = (c - 1) as f64;
                if !pairs_intersect(q, &s) {
                    sum += profit;
                } else if rng.gen_bool(0.5) {
                    sum += cfg.beta * profit;
                }
            }
            (stats.get(q).saturating_sub(1)) as f64 + cfg.alpha * sum
        }
    }
}

/// Maximum `H` over all candidates, each scored once with fresh draws.
pub fn select_greedy_intersections<R: Rng>(
    stats: &PairStats,
    cfg: &ProcessConfig,
    rng: &mut R,
) -> Option<CanonicalPair> {
    let index = CandidateIndex::new(stats);
    let mut best: Option<(usize, f64)> = None;
    for at in 0..index.pairs.len() {
        let h = index.score(at, cfg, rng);
        if best.map_or(true, |(_, bh)| h > bh) {
            best = Some((at, h));
        }
    }
    best.map(|(at, _)| index.pairs[at].0)
}

pub fn select_mixed<R: Rng>(
    stats: &PairStats,
    cfg: &ProcessConfig,
    rng: &mut R,
) -> Option<CanonicalPair> {
    match cfg.mix.pick(rng) {
        StrategyKind::GreedyIntersections => select_greedy_intersections(stats, cfg, rng),
        StrategyKind::GreedyAlternative => select_greedy_alternative(stats, rng),
        StrategyKind::GreedyRandom => select_greedy_random(stats, cfg, rng),
        _ => select_weighted_random(stats, rng),
    }
}

/// Number of pairs that would first reach frequency 2 if `q` were
/// substituted.
///
/// Only pairs involving the fresh variable can gain occurrences, and they
/// only appear in expressions that hold `q`, so those are the only
/// expressions inspected.
pub fn new_opportunities(sys: &LinearSystem, q: &CanonicalPair) -> usize {
    let k = sys.next_id() as i32;
    let (a, b) = q.positive_terms();
    let mut counts: FxHashMap<CanonicalPair, u32> = FxHashMap::default();
    for e in sys.expressions() {
        let occ = if e.contains(a) && e.contains(b) {
            1
        } else if e.contains(-a) && e.contains(-b) {
            -1
        } else {
            continue;
        };
        for t in e.sorted_terms() {
            if t == occ * a || t == occ * b {
                continue;
            }
            let (pair, _) = canonicalize_unchecked(t, occ * k);
            *counts.entry(pair).or_insert(0) += 1;
        }
    }
    counts.values().filter(|&&c| c >= 2).count()
}

/// Greedy-potential score `(c_q - 1) + alpha * new_opportunities`.
pub fn score_potential(q: &CanonicalPair, sys: &LinearSystem, alpha: f64) -> f64 {
    let c = sys.frequency(q);
    c.saturating_sub(1) as f64 + alpha * new_opportunities(sys, q) as f64
}

pub fn select_greedy_potential(
    sys: &LinearSystem,
    stats: &PairStats,
    alpha: f64,
) -> Option<CanonicalPair> {
    let mut best: Option<(CanonicalPair, f64)> = None;
    for (q, c) in stats.candidates() {
        let score = (c - 1) as f64 + alpha * new_opportunities(sys, &q) as f64;
        if best.map_or(true, |(_, bs)| score > bs) {
            best = Some((q, score));
        }
    }
    best.map(|(q, _)| q)
}
