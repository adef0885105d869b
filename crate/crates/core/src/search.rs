//! Portfolio search: many seeded reduction processes per expression set,
//! synchronized at iteration barriers.
//!
//! Every random choice is drawn from a stream seeded by
//! [`derive_seed`]`(master_seed, stream, iteration, process)`, and results
//! are gathered in process order, so a report depends only on the input and
//! the configuration, never on thread scheduling.

use std::time::Instant;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{replay_prefix, run_cse_with, SolutionRecord};
use crate::scheme::{Scheme, SchemeCheckReport, SchemeError};
use crate::strategy::{MixWeights, ProcessConfig, StrategyKind};
use crate::system::{CanonicalPair, LinearSystem};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("scheme fails the validity check: {0:?}")]
    InvalidScheme(SchemeCheckReport),
    #[error(transparent)]
    Scheme(#[from] SchemeError),
    #[error("reports refer to different schemes: {expected} vs {found}")]
    DigestMismatch { expected: String, found: String },
    #[error("no reports to combine")]
    NoReports,
}

/// Relative weight of each strategy when a process draws its strategy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrategyWeights {
    pub g: f64,
    pub gi: f64,
    pub ga: f64,
    pub gr: f64,
    pub wr: f64,
    pub mix: f64,
    pub gp: f64,
}

impl Default for StrategyWeights {
    fn default() -> Self {
        StrategyWeights {
            g: 0.0,
            gi: 8.0,
            ga: 4.0,
            gr: 2.0,
            wr: 1.0,
            mix: 0.1,
            gp: 0.01,
        }
    }
}

impl StrategyWeights {
    pub fn zero() -> Self {
        StrategyWeights {
            g: 0.0,
            gi: 0.0,
            ga: 0.0,
            gr: 0.0,
            wr: 0.0,
            mix: 0.0,
            gp: 0.0,
        }
    }

    /// All weight on one strategy.
    pub fn only(kind: StrategyKind) -> Self {
        let mut w = Self::zero();
        *w.weight_mut(kind) = 1.0;
        w
    }

    pub fn weight(&self, kind: StrategyKind) -> f64 {
        let mut copy = *self;
        *copy.weight_mut(kind)
    }

    pub fn weight_mut(&mut self, kind: StrategyKind) -> &mut f64 {
        match kind {
            StrategyKind::Greedy => &mut self.g,
            StrategyKind::GreedyIntersections => &mut self.gi,
            StrategyKind::GreedyAlternative => &mut self.ga,
            StrategyKind::GreedyRandom => &mut self.gr,
            StrategyKind::WeightedRandom => &mut self.wr,
            StrategyKind::Mixed => &mut self.mix,
            StrategyKind::GreedyPotential => &mut self.gp,
        }
    }

    /// Parses `gi=8,ga=4,...`; strategies not listed get weight 0.
    pub fn parse(spec: &str) -> Result<Self, String> {
        let mut w = Self::zero();
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, value) = item
                .split_once('=')
                .ok_or_else(|| format!("expected name=value, got '{item}'"))?;
            let kind: StrategyKind = name.trim().parse()?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| format!("weight for {name} is not a number: '{value}'"))?;
            *w.weight_mut(kind) = value;
        }
        Ok(w)
    }

    fn validate(&self) -> Result<(), SearchError> {
        let values = StrategyKind::ALL.map(|k| self.weight(k));
        if values.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(SearchError::Config("strategy weights must be finite and non-negative".into()));
        }
        if values.iter().sum::<f64>() <= 0.0 {
            return Err(SearchError::Config("at least one strategy weight must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipConfig {
    /// Schemes per iteration, including the unmodified input.
    pub schemes: usize,
    pub flips_min: usize,
    pub flips_max: usize,
}

impl Default for FlipConfig {
    fn default() -> Self {
        FlipConfig {
            schemes: 32,
            flips_min: 1,
            flips_max: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// `None` picks a default from the rank: 256 below rank 100, else 64.
    pub n_processes: Option<usize>,
    pub weights: StrategyWeights,
    pub mix: MixWeights,
    pub reinit_fraction: f64,
    pub patience: usize,
    pub max_iterations: Option<usize>,
    pub flip_mode: Option<FlipConfig>,
    pub master_seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            n_processes: None,
            weights: StrategyWeights::default(),
            mix: MixWeights::default(),
            reinit_fraction: 0.4,
            patience: 10,
            max_iterations: None,
            flip_mode: None,
            master_seed: 0,
        }
    }
}

pub fn default_processes(rank: usize) -> usize {
    if rank < 100 {
        256
    } else {
        64
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        if self.n_processes == Some(0) {
            return Err(SearchError::Config("n_processes must be at least 1".into()));
        }
        self.weights.validate()?;
        let mix = [self.mix.gi, self.mix.ga, self.mix.gr, self.mix.wr];
        if mix.iter().any(|w| !w.is_finite() || *w < 0.0) || mix.iter().sum::<f64>() <= 0.0 {
            return Err(SearchError::Config("mixed weights must be non-negative with a positive sum".into()));
        }
        if !(0.0..=1.0).contains(&self.reinit_fraction) {
            return Err(SearchError::Config("reinit_fraction must lie in [0, 1]".into()));
        }
        if self.patience == 0 {
            return Err(SearchError::Config("patience must be at least 1".into()));
        }
        if let Some(f) = &self.flip_mode {
            if f.schemes == 0 || f.flips_min > f.flips_max {
                return Err(SearchError::Config("flip mode needs schemes >= 1 and flips_min <= flips_max".into()));
            }
        }
        Ok(())
    }

    fn processes_for(&self, rank: usize) -> usize {
        self.n_processes.unwrap_or_else(|| default_processes(rank))
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of one process slot: splitmix64 chained over
/// `(master, stream, iteration, process)`.
pub fn derive_seed(master: u64, stream: u64, iteration: u64, process: u64) -> u64 {
    [stream, iteration, process]
        .into_iter()
        .fold(splitmix64(master), |h, x| splitmix64(h ^ x))
}

const PARAM_TAG: u64 = 0x7061_7261_6d73;
const FLIP_STREAM: u64 = 0x666c_6970;

/// Strategy and parameters for every process slot of one iteration.
///
/// Slot 0 of iteration 1 is always plain greedy; every other slot draws its
/// strategy by weight and `alpha`, `beta`, `p_greedy` from their ranges.
pub fn assign_strategies(
    cfg: &SearchConfig,
    stream: u64,
    iteration: usize,
    n_processes: usize,
) -> Result<Vec<ProcessConfig>, SearchError> {
    cfg.weights.validate()?;
    let dist = WeightedIndex::new(StrategyKind::ALL.map(|k| cfg.weights.weight(k)))
        .map_err(|e| SearchError::Config(e.to_string()))?;
    Ok((0..n_processes)
        .map(|p| {
            let seed = derive_seed(cfg.master_seed, stream, iteration as u64, p as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ PARAM_TAG));
            let strategy = if iteration == 1 && p == 0 {
                StrategyKind::Greedy
            } else {
                StrategyKind::ALL[dist.sample(&mut rng)]
            };
            ProcessConfig {
                strategy,
                alpha: rng.gen_range(0.0..=0.5),
                beta: rng.gen_range(0.5..=1.0),
                p_greedy: rng.gen_range(0.5..1.0),
                seed,
                mix: cfg.mix,
            }
        })
        .collect())
}

/// Result of optimizing one expression set.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemOutcome {
    pub best: SolutionRecord,
    pub iterations: usize,
    /// Incumbent cost after each iteration.
    pub history: Vec<usize>,
}

/// Iteration state of one expression set: the pristine system, the
/// incumbent and each slot's previous cost.
struct SystemSearch {
    pristine: LinearSystem,
    best: Option<SolutionRecord>,
    last_costs: Vec<(usize, usize)>,
    stagnation: usize,
    history: Vec<usize>,
}

impl SystemSearch {
    fn new(pristine: LinearSystem) -> Self {
        SystemSearch {
            pristine,
            best: None,
            last_costs: Vec::new(),
            stagnation: 0,
            history: Vec::new(),
        }
    }

    fn converged(&self, cfg: &SearchConfig) -> bool {
        self.best.is_some()
            && (self.stagnation >= cfg.patience
                || cfg.max_iterations.is_some_and(|m| self.history.len() >= m))
    }

    /// Runs one iteration over the given `(slot, config)` pairs.
    fn step(&mut self, slots: &[(usize, ProcessConfig)], reinit_fraction: f64) {
        let reinit = self.reinit_slots(slots.len(), reinit_fraction);
        let shared: &[CanonicalPair] = self
            .best
            .as_ref()
            .map(|b| b.substitutions.as_slice())
            .unwrap_or(&[]);
        let pristine = &self.pristine;
        let results: Vec<SolutionRecord> = slots
            .par_iter()
            .map(|(slot, cfg)| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                let limit = shared.len() * 3 / 4;
                let start = if reinit.contains(slot) && limit >= 1 {
                    let k = rng.gen_range(1..=limit);
                    replay_prefix(pristine, &shared[..k]).expect("incumbent prefixes replay")
                } else {
                    pristine.clone()
                };
                run_cse_with(start, cfg, &mut rng).record
            })
            .collect();

        self.last_costs = slots
            .iter()
            .zip(&results)
            .map(|((slot, _), r)| (*slot, r.cost))
            .collect();
        let winner = results
            .into_iter()
            .enumerate()
            .min_by_key(|(idx, r)| (r.cost, *idx))
            .map(|(_, r)| r)
            .expect("at least one process");
        match &self.best {
            Some(b) if winner.cost >= b.cost => self.stagnation += 1,
            _ => {
                self.best = Some(winner);
                self.stagnation = 0;
            }
        }
        self.history.push(self.best.as_ref().map_or(0, |b| b.cost));
    }

    /// The `round(fraction * n)` slots with the worst previous costs.
    fn reinit_slots(&self, n: usize, fraction: f64) -> Vec<usize> {
        if self.best.is_none() {
            return Vec::new();
        }
        let count = ((fraction * n as f64).round() as usize).min(self.last_costs.len());
        let mut ranked = self.last_costs.clone();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        ranked.into_iter().take(count).map(|(slot, _)| slot).collect()
    }

    fn outcome(self) -> SystemOutcome {
        SystemOutcome {
            iterations: self.history.len(),
            best: self.best.expect("at least one iteration ran"),
            history: self.history,
        }
    }
}

fn run_to_convergence(
    sys: &LinearSystem,
    cfg: &SearchConfig,
    stream: u64,
    n_processes: usize,
) -> Result<SystemOutcome, SearchError> {
    let mut search = SystemSearch::new(sys.clone());
    let mut iteration = 0;
    while !search.converged(cfg) {
        iteration += 1;
        let slots: Vec<_> = assign_strategies(cfg, stream, iteration, n_processes)?
            .into_iter()
            .enumerate()
            .collect();
        search.step(&slots, cfg.reinit_fraction);
    }
    Ok(search.outcome())
}

/// Portfolio search on a single expression set.
///
/// A missing process count defaults to 256.
pub fn optimize_system(sys: &LinearSystem, cfg: &SearchConfig) -> Result<SystemOutcome, SearchError> {
    cfg.validate()?;
    run_to_convergence(sys, cfg, 0, cfg.n_processes.unwrap_or(256))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Component {
    U,
    V,
    W,
}

impl Component {
    pub const ALL: [Component; 3] = [Component::U, Component::V, Component::W];

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub cost: usize,
    pub naive: usize,
    pub substitutions: Vec<CanonicalPair>,
    pub strategy: StrategyKind,
    pub seed: u64,
    pub iterations: usize,
}

impl ComponentReport {
    fn new(naive: usize, record: SolutionRecord, iterations: usize) -> Self {
        ComponentReport {
            cost: record.cost,
            naive,
            substitutions: record.substitutions,
            strategy: record.strategy,
            seed: record.seed,
            iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Components {
    pub u: ComponentReport,
    pub v: ComponentReport,
    pub w: ComponentReport,
}

impl Components {
    pub fn get(&self, c: Component) -> &ComponentReport {
        match c {
            Component::U => &self.u,
            Component::V => &self.v,
            Component::W => &self.w,
        }
    }

    pub fn costs(&self) -> [usize; 3] {
        [self.u.cost, self.v.cost, self.w.cost]
    }

    fn from_array([u, v, w]: [ComponentReport; 3]) -> Self {
        Components { u, v, w }
    }
}

/// Which scheme a flip-mode result was measured on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlipOrigin {
    /// 0 is the unmodified input; others were regenerated each iteration.
    pub scheme_index: usize,
    pub iteration: usize,
    pub scheme: Scheme,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    /// Digest of the scheme the substitutions apply to.
    pub scheme_digest: String,
    pub format: [usize; 4],
    pub config: SearchConfig,
    pub components: Components,
    pub total: usize,
    pub naive_total: usize,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub combined_from: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flip: Option<FlipOrigin>,
}

impl SearchReport {
    /// The scheme this report's substitutions refer to.
    pub fn scheme<'a>(&'a self, input: &'a Scheme) -> &'a Scheme {
        self.flip.as_ref().map_or(input, |f| &f.scheme)
    }

    /// Replays every component on `scheme` and checks cost and expansion.
    pub fn verify_against(&self, scheme: &Scheme) -> bool {
        if scheme.digest() != self.scheme_digest {
            return false;
        }
        scheme
            .extract_systems()
            .iter()
            .zip(Component::ALL)
            .all(|(sys, c)| {
                let comp = self.components.get(c);
                match replay_prefix(sys, &comp.substitutions) {
                    Ok(done) => {
                        done.total_cost() == comp.cost
                            && crate::system::expand_and_verify(sys, &done).unwrap_or(false)
                    }
                    Err(_) => false,
                }
            })
    }
}

fn ensure_valid(s: &Scheme, seed: u64) -> Result<(), SearchError> {
    let check = s.check_validity(seed)?;
    if check.valid {
        Ok(())
    } else {
        Err(SearchError::InvalidScheme(check))
    }
}

/// Portfolio search on the three expression sets of a scheme.
pub fn optimize_scheme(s: &Scheme, cfg: &SearchConfig) -> Result<SearchReport, SearchError> {
    cfg.validate()?;
    ensure_valid(s, cfg.master_seed)?;
    let start = Instant::now();
    let n = cfg.processes_for(s.r);
    let systems = s.extract_systems();
    let mut outcomes = Vec::with_capacity(3);
    for (stream, sys) in systems.iter().enumerate() {
        outcomes.push(run_to_convergence(sys, cfg, stream as u64, n)?);
    }
    let iterations = outcomes.iter().map(|o| o.iterations).max().unwrap_or(0);
    let reports: Vec<ComponentReport> = systems
        .iter()
        .zip(outcomes)
        .map(|(sys, o)| ComponentReport::new(sys.naive_cost(), o.best, o.iterations))
        .collect();
    Ok(build_report(
        s,
        cfg,
        reports.try_into().expect("three components"),
        iterations,
        start,
        None,
    ))
}

fn build_report(
    s: &Scheme,
    cfg: &SearchConfig,
    components: [ComponentReport; 3],
    iterations: usize,
    start: Instant,
    flip: Option<FlipOrigin>,
) -> SearchReport {
    let components = Components::from_array(components);
    SearchReport {
        scheme_digest: s.digest(),
        format: [s.m, s.n, s.p, s.r],
        config: cfg.clone(),
        total: components.costs().iter().sum(),
        naive_total: s.naive_costs().iter().sum(),
        components,
        iterations,
        wall_ms: Some(start.elapsed().as_millis() as u64),
        combined_from: None,
        flip,
    }
}

/// Best whole-scheme result seen so far in flip mode.
struct FlipIncumbent {
    total: usize,
    records: [SolutionRecord; 3],
    scheme_index: usize,
    iteration: usize,
    scheme: Scheme,
}

/// Portfolio search that also explores random flips of the scheme.
///
/// Each iteration uses `M` schemes: the input itself, whose expression sets
/// keep their incumbents and sharing across iterations, and `M - 1` fresh
/// random flip chains of the input. Process `p` works on scheme `p mod M`.
/// The result is the best whole-scheme total, reported against the scheme
/// it was measured on.
pub fn optimize_with_flips(s: &Scheme, cfg: &SearchConfig) -> Result<SearchReport, SearchError> {
    cfg.validate()?;
    let flip = cfg
        .flip_mode
        .ok_or_else(|| SearchError::Config("flip mode is not enabled".into()))?;
    ensure_valid(s, cfg.master_seed)?;
    let start = Instant::now();
    let n = cfg.processes_for(s.r);
    let m = flip.schemes;
    let base_systems = s.extract_systems();
    let mut base: Vec<SystemSearch> = base_systems.iter().cloned().map(SystemSearch::new).collect();
    let mut incumbent: Option<FlipIncumbent> = None;
    let mut stagnation = 0;
    let mut iteration = 0;

    loop {
        iteration += 1;
        let assigned: Vec<Vec<ProcessConfig>> = (0..3)
            .map(|stream| assign_strategies(cfg, stream as u64, iteration, n))
            .collect::<Result<_, _>>()?;

        for (stream, search) in base.iter_mut().enumerate() {
            if !search.converged(cfg) {
                let slots: Vec<_> = assigned[stream]
                    .iter()
                    .enumerate()
                    .filter(|(p, _)| p % m == 0)
                    .map(|(p, c)| (p, *c))
                    .collect();
                search.step(&slots, cfg.reinit_fraction);
            }
        }
        let mut candidates: Vec<(usize, usize, [SolutionRecord; 3], Scheme)> = Vec::new();
        let base_records: [SolutionRecord; 3] =
            std::array::from_fn(|c| base[c].best.clone().expect("stepped at least once"));
        candidates.push((
            base_records.iter().map(|r| r.cost).sum(),
            0,
            base_records,
            s.clone(),
        ));

        let flipped: Vec<(usize, Scheme)> = (1..m.min(n))
            .map(|idx| {
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    cfg.master_seed,
                    FLIP_STREAM,
                    iteration as u64,
                    idx as u64,
                ));
                let f = s.random_flip(&mut rng, flip.flips_min, flip.flips_max);
                let ok = f.check_validity(cfg.master_seed).map(|r| r.valid).unwrap_or(false);
                (idx, if ok { f } else { s.clone() })
            })
            .collect();
        let jobs: Vec<(usize, usize, LinearSystem, ProcessConfig)> = flipped
            .iter()
            .enumerate()
            .flat_map(|(pos, (idx, scheme))| {
                let systems = scheme.extract_systems();
                let assigned = &assigned;
                systems.into_iter().enumerate().flat_map(move |(c, sys)| {
                    assigned[c]
                        .iter()
                        .enumerate()
                        .filter(move |(p, _)| p % m == *idx)
                        .map(move |(_, cfg)| (pos, c, sys.clone(), *cfg))
                })
            })
            .collect();
        let results: Vec<(usize, usize, SolutionRecord)> = jobs
            .into_par_iter()
            .map(|(pos, c, sys, pcfg)| {
                let mut rng = ChaCha8Rng::seed_from_u64(pcfg.seed);
                (pos, c, run_cse_with(sys, &pcfg, &mut rng).record)
            })
            .collect();
        let mut per_scheme: Vec<[Option<SolutionRecord>; 3]> = vec![Default::default(); flipped.len()];
        for (pos, c, rec) in results {
            let slot = &mut per_scheme[pos][c];
            if slot.as_ref().map_or(true, |b| rec.cost < b.cost) {
                *slot = Some(rec);
            }
        }
        for ((idx, scheme), recs) in flipped.into_iter().zip(per_scheme) {
            if let [Some(u), Some(v), Some(w)] = recs {
                candidates.push((u.cost + v.cost + w.cost, idx, [u, v, w], scheme));
            }
        }

        let (total, scheme_index, records, scheme) = candidates
            .into_iter()
            .min_by_key(|c| (c.0, c.1))
            .expect("input scheme is always a candidate");
        match &incumbent {
            Some(b) if total >= b.total => stagnation += 1,
            _ => {
                incumbent = Some(FlipIncumbent {
                    total,
                    records,
                    scheme_index,
                    iteration,
                    scheme,
                });
                stagnation = 0;
            }
        }
        let capped = cfg.max_iterations.is_some_and(|mx| iteration >= mx);
        if capped || (base.iter().all(|b| b.converged(cfg)) && stagnation >= cfg.patience) {
            break;
        }
    }

    let best = incumbent.expect("at least one iteration");
    let systems = best.scheme.extract_systems();
    let components: Vec<ComponentReport> = systems
        .iter()
        .zip(best.records)
        .zip(&base)
        .map(|((sys, rec), b)| {
            let its = if best.scheme_index == 0 { b.history.len() } else { best.iteration };
            ComponentReport::new(sys.naive_cost(), rec, its)
        })
        .collect();
    let mut report = build_report(
        &best.scheme,
        cfg,
        components.try_into().expect("three components"),
        iteration,
        start,
        Some(FlipOrigin {
            scheme_index: best.scheme_index,
            iteration: best.iteration,
            scheme: best.scheme.clone(),
        }),
    );
    // Savings are measured against the input's naive cost.
    report.naive_total = s.naive_costs().iter().sum();
    Ok(report)
}

/// Per component, the cheapest record among reports on the same scheme.
pub fn combine_componentwise(reports: &[SearchReport]) -> Result<SearchReport, SearchError> {
    let first = reports.first().ok_or(SearchError::NoReports)?;
    if let Some(other) = reports.iter().find(|r| r.scheme_digest != first.scheme_digest) {
        return Err(SearchError::DigestMismatch {
            expected: first.scheme_digest.clone(),
            found: other.scheme_digest.clone(),
        });
    }
    if reports.len() == 1 {
        return Ok(first.clone());
    }
    let pick = |c: Component| -> ComponentReport {
        reports
            .iter()
            .map(|r| r.components.get(c))
            .min_by_key(|comp| comp.cost)
            .expect("non-empty")
            .clone()
    };
    let components = Components {
        u: pick(Component::U),
        v: pick(Component::V),
        w: pick(Component::W),
    };
    let wall_ms = reports
        .iter()
        .map(|r| r.wall_ms)
        .sum::<Option<u64>>();
    Ok(SearchReport {
        scheme_digest: first.scheme_digest.clone(),
        format: first.format,
        config: first.config.clone(),
        total: components.costs().iter().sum(),
        naive_total: first.naive_total,
        components,
        iterations: reports.iter().map(|r| r.iterations).max().unwrap_or(0),
        wall_ms,
        combined_from: Some(reports.len()),
        flip: first.flip.clone(),
    })
}
