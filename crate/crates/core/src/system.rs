//! Ternary linear expression sets stored as sets of signed variable indices.
//!
//! An expression `x1 - x4 + x5` is the set `{1, -4, 5}`. Fresh variables get
//! dense ids starting at `n_x + 1` in the order they are introduced, so a list
//! of substitutions fully determines every intermediate state.

use std::fmt;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Signed variable index: `+i` is `+x_i`, `-i` is `-x_i`. Never zero.
pub type Term = i32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("invalid pair: terms {0} and {1} refer to the same variable")]
    InvalidPair(Term, Term),
    #[error("term 0 is not a variable")]
    ZeroTerm,
    #[error("expression {expression} references x{index} but only {defined} variables are defined")]
    UndefinedVariable {
        expression: usize,
        index: u32,
        defined: u32,
    },
    #[error("expression {expression} contains both +x{index} and -x{index}")]
    Conflicting { expression: usize, index: u32 },
    #[error("expression {expression} repeats x{index}")]
    Duplicate { expression: usize, index: u32 },
    #[error("fresh variable x{id} is defined from x{operand}, which is not defined before it")]
    UndefinedFresh { id: u32, operand: u32 },
    #[error("pair {0} does not occur in any expression")]
    NoOccurrence(CanonicalPair),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Minus,
    Plus,
}

impl Sign {
    pub fn of(t: Term) -> Sign {
        if t < 0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn value(self) -> i32 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    pub fn times(self, other: Sign) -> Sign {
        if self == other {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// The normalized two-term subexpression `x_i + sign * x_j` with `i < j`.
///
/// Ordering is lexicographic on `(i, j, sign)` with `Minus < Plus`; every
/// tie-break in the selectors uses it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "(u32, u32, i8)", try_from = "(u32, u32, i8)")]
pub struct CanonicalPair {
    pub i: u32,
    pub j: u32,
    pub sign: Sign,
}

impl CanonicalPair {
    pub fn new(i: u32, j: u32, sign: Sign) -> Result<Self, SystemError> {
        if i == 0 || j == 0 {
            return Err(SystemError::ZeroTerm);
        }
        if i >= j {
            return Err(SystemError::InvalidPair(i as Term, j as Term));
        }
        Ok(CanonicalPair { i, j, sign })
    }

    /// The two signed terms of the positive occurrence `x_i + sign * x_j`.
    pub fn positive_terms(&self) -> (Term, Term) {
        (self.i as Term, self.sign.value() * self.j as Term)
    }

    /// The two signed terms of the negated occurrence `-x_i - sign * x_j`.
    pub fn negative_terms(&self) -> (Term, Term) {
        let (a, b) = self.positive_terms();
        (-a, -b)
    }

    pub fn shares_variable(&self, other: &CanonicalPair) -> bool {
        self.i == other.i || self.i == other.j || self.j == other.i || self.j == other.j
    }
}

impl From<CanonicalPair> for (u32, u32, i8) {
    fn from(p: CanonicalPair) -> Self {
        (p.i, p.j, p.sign.value() as i8)
    }
}

impl TryFrom<(u32, u32, i8)> for CanonicalPair {
    type Error = String;

    fn try_from((i, j, s): (u32, u32, i8)) -> Result<Self, Self::Error> {
        let sign = match s {
            1 => Sign::Plus,
            -1 => Sign::Minus,
            other => return Err(format!("pair sign must be 1 or -1, got {other}")),
        };
        CanonicalPair::new(i, j, sign).map_err(|e| e.to_string())
    }
}

impl fmt::Display for CanonicalPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.sign == Sign::Plus { '+' } else { '-' };
        write!(f, "(x{} {} x{})", self.i, op, self.j)
    }
}

/// Normalizes the two-term combination `a + b` (in signed-index form).
///
/// Returns the canonical pair and the sign `s` with `s * (x_i + rel * x_j)`
/// equal to the input.
pub fn canonicalize(a: Term, b: Term) -> Result<(CanonicalPair, Sign), SystemError> {
    if a == 0 || b == 0 {
        return Err(SystemError::ZeroTerm);
    }
    if a.unsigned_abs() == b.unsigned_abs() {
        return Err(SystemError::InvalidPair(a, b));
    }
    Ok(canonicalize_unchecked(a, b))
}

#[inline]
pub(crate) fn canonicalize_unchecked(a: Term, b: Term) -> (CanonicalPair, Sign) {
    let (x, y) = if a.unsigned_abs() < b.unsigned_abs() { (a, b) } else { (b, a) };
    let occ = Sign::of(x);
    let pair = CanonicalPair {
        i: x.unsigned_abs(),
        j: y.unsigned_abs(),
        sign: occ.times(Sign::of(y)),
    };
    (pair, occ)
}

/// One linear expression, as a hash set of signed indices.
#[derive(Clone, Debug, Default)]
pub struct Expression {
    terms: FxHashSet<Term>,
}

impl Expression {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, t: Term) -> bool {
        self.terms.contains(&t)
    }

    /// Terms ordered by variable index.
    pub fn sorted_terms(&self) -> Vec<Term> {
        let mut v: Vec<Term> = self.terms.iter().copied().collect();
        v.sort_unstable_by_key(|t| t.unsigned_abs());
        v
    }

    pub fn additions(&self) -> usize {
        self.terms.len().saturating_sub(1)
    }

    /// Which occurrence of `pair` this expression holds, if any.
    fn occurrence(&self, pair: &CanonicalPair) -> Option<Sign> {
        let (a, b) = pair.positive_terms();
        if self.terms.contains(&a) && self.terms.contains(&b) {
            Some(Sign::Plus)
        } else if self.terms.contains(&-a) && self.terms.contains(&-b) {
            Some(Sign::Minus)
        } else {
            None
        }
    }
}

impl PartialEq for Expression {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for Expression {}

/// A set of expressions plus the fresh variables introduced so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSystem {
    n_x: u32,
    expressions: Vec<Expression>,
    fresh: Vec<CanonicalPair>,
}

impl LinearSystem {
    /// Builds a system over `n_x` base variables with no fresh variables.
    pub fn new(n_x: u32, expressions: Vec<Vec<Term>>) -> Result<Self, SystemError> {
        Self::from_parts(n_x, expressions, Vec::new())
    }

    /// Builds a system from expressions and fresh definitions.
    ///
    /// Expression terms are checked against `n_x + fresh.len()`. Definitions
    /// are not checked here; `expand` reports definitions that reference
    /// variables not yet defined.
    pub fn from_parts(
        n_x: u32,
        expressions: Vec<Vec<Term>>,
        fresh: Vec<CanonicalPair>,
    ) -> Result<Self, SystemError> {
        let defined = n_x + fresh.len() as u32;
        let mut out = Vec::with_capacity(expressions.len());
        for (e, terms) in expressions.into_iter().enumerate() {
            let mut set = FxHashSet::default();
            for t in terms {
                if t == 0 {
                    return Err(SystemError::ZeroTerm);
                }
                let index = t.unsigned_abs();
                if index > defined {
                    return Err(SystemError::UndefinedVariable {
                        expression: e,
                        index,
                        defined,
                    });
                }
                if set.contains(&-t) {
                    return Err(SystemError::Conflicting { expression: e, index });
                }
                if !set.insert(t) {
                    return Err(SystemError::Duplicate { expression: e, index });
                }
            }
            out.push(Expression { terms: set });
        }
        Ok(LinearSystem {
            n_x,
            expressions: out,
            fresh,
        })
    }

    /// Builds a system from dense ternary rows (one row per expression).
    pub fn from_dense_rows<R: AsRef<[i8]>>(n_x: u32, rows: &[R]) -> Self {
        let expressions = rows
            .iter()
            .map(|row| {
                row.as_ref()
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| c != 0)
                    .map(|(k, &c)| (k as Term + 1) * c.signum() as Term)
                    .collect()
            })
            .collect();
        Self::new(n_x, expressions).expect("dense rows are well formed")
    }

    /// Dense coefficient rows over the base variables; fresh variables are
    /// expanded first.
    pub fn to_dense_rows(&self) -> Result<Vec<Vec<i64>>, SystemError> {
        self.expand()
    }

    pub fn n_x(&self) -> u32 {
        self.n_x
    }

    pub fn n_f(&self) -> u32 {
        self.fresh.len() as u32
    }

    pub fn next_id(&self) -> u32 {
        self.n_x + self.n_f() + 1
    }

    pub fn len(&self) -> usize {
        self.expressions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.expressions.is_empty()
    }

    pub fn expressions(&self) -> &[Expression] {
        &self.expressions
    }

    /// Fresh definitions in allocation order; entry `t` defines `x_{n_x + t + 1}`.
    pub fn fresh_defs(&self) -> &[CanonicalPair] {
        &self.fresh
    }

    pub fn fresh_id(&self, position: usize) -> u32 {
        self.n_x + position as u32 + 1
    }

    /// Expressions as sorted term lists.
    pub fn sorted_expressions(&self) -> Vec<Vec<Term>> {
        self.expressions.iter().map(Expression::sorted_terms).collect()
    }

    pub fn naive_cost(&self) -> usize {
        self.expressions.iter().map(Expression::additions).sum()
    }

    pub fn total_cost(&self) -> usize {
        self.fresh.len() + self.naive_cost()
    }

    /// Counts every canonical pair across all expressions.
    pub fn count_pairs(&self) -> PairStats {
        let mut counts: FxHashMap<CanonicalPair, u32> = FxHashMap::default();
        let mut terms = Vec::new();
        for e in &self.expressions {
            terms.clear();
            terms.extend(e.terms.iter().copied());
            for a in 0..terms.len() {
                for b in a + 1..terms.len() {
                    let (pair, _) = canonicalize_unchecked(terms[a], terms[b]);
                    *counts.entry(pair).or_insert(0) += 1;
                }
            }
        }
        let mut entries: Vec<(CanonicalPair, u32)> = counts.into_iter().collect();
        entries.sort_unstable_by_key(|e| e.0);
        PairStats { entries }
    }

    /// Number of expressions holding `pair` (either polarity).
    pub fn frequency(&self, pair: &CanonicalPair) -> usize {
        self.expressions
            .iter()
            .filter(|e| e.occurrence(pair).is_some())
            .count()
    }

    /// Introduces `x_k = x_i + sign * x_j` and rewrites every occurrence of
    /// the pair. Returns the fresh id `k`.
    pub fn apply_substitution(&mut self, pair: CanonicalPair) -> Result<u32, SystemError> {
        let hits: Vec<(usize, Sign)> = self
            .expressions
            .iter()
            .enumerate()
            .filter_map(|(idx, e)| e.occurrence(&pair).map(|s| (idx, s)))
            .collect();
        if hits.is_empty() {
            return Err(SystemError::NoOccurrence(pair));
        }
        let k = self.next_id() as Term;
        let (a, b) = pair.positive_terms();
        for (idx, occ) in hits {
            let terms = &mut self.expressions[idx].terms;
            let s = occ.value();
            terms.remove(&(s * a));
            terms.remove(&(s * b));
            terms.insert(s * k);
        }
        self.fresh.push(pair);
        Ok(k as u32)
    }

    /// Expands every expression down to base variables.
    pub fn expand(&self) -> Result<Vec<Vec<i64>>, SystemError> {
        let n = self.n_x as usize;
        let mut forms: Vec<Vec<i64>> = Vec::with_capacity(self.fresh.len());
        for (t, def) in self.fresh.iter().enumerate() {
            let id = self.fresh_id(t);
            if def.j >= id {
                return Err(SystemError::UndefinedFresh { id, operand: def.j });
            }
            let mut form = self.form_of(def.i, &forms);
            let other = self.form_of(def.j, &forms);
            let s = def.sign.value() as i64;
            form.iter_mut().zip(&other).for_each(|(x, y)| *x += s * y);
            forms.push(form);
        }
        let defined = self.n_x + self.n_f();
        let mut rows = Vec::with_capacity(self.expressions.len());
        for (e, expr) in self.expressions.iter().enumerate() {
            let mut row = vec![0i64; n];
            for &t in &expr.terms {
                let index = t.unsigned_abs();
                if index > defined {
                    return Err(SystemError::UndefinedVariable {
                        expression: e,
                        index,
                        defined,
                    });
                }
                let s = Sign::of(t).value() as i64;
                let form = self.form_of(index, &forms);
                row.iter_mut().zip(&form).for_each(|(x, y)| *x += s * y);
            }
            rows.push(row);
        }
        Ok(rows)
    }

    fn form_of(&self, index: u32, forms: &[Vec<i64>]) -> Vec<i64> {
        if index <= self.n_x {
            let mut v = vec![0i64; self.n_x as usize];
            v[index as usize - 1] = 1;
            v
        } else {
            forms[(index - self.n_x - 1) as usize].clone()
        }
    }
}

/// Expands both systems to base variables and compares them expression by
/// expression with exact integer arithmetic.
pub fn expand_and_verify(
    original: &LinearSystem,
    optimized: &LinearSystem,
) -> Result<bool, SystemError> {
    if original.n_x() != optimized.n_x() || original.len() != optimized.len() {
        return Ok(false);
    }
    Ok(original.expand()? == optimized.expand()?)
}

/// Pair frequencies, sorted by pair.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairStats {
    entries: Vec<(CanonicalPair, u32)>,
}

impl PairStats {
    /// Builds stats from arbitrary entries; zero counts are dropped and
    /// duplicate pairs are summed.
    pub fn from_entries<I: IntoIterator<Item = (CanonicalPair, u32)>>(entries: I) -> Self {
        let mut map: FxHashMap<CanonicalPair, u32> = FxHashMap::default();
        for (p, c) in entries {
            if c > 0 {
                *map.entry(p).or_insert(0) += c;
            }
        }
        let mut entries: Vec<_> = map.into_iter().collect();
        entries.sort_unstable_by_key(|e| e.0);
        PairStats { entries }
    }

    pub fn get(&self, pair: &CanonicalPair) -> u32 {
        self.entries
            .binary_search_by(|(p, _)| p.cmp(pair))
            .map(|idx| self.entries[idx].1)
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (CanonicalPair, u32)> + '_ {
        self.entries.iter().copied()
    }

    /// Pairs with frequency at least 2, in pair order.
    pub fn candidates(&self) -> impl Iterator<Item = (CanonicalPair, u32)> + '_ {
        self.iter().filter(|&(_, c)| c >= 2)
    }

    pub fn has_candidate(&self) -> bool {
        self.entries.iter().any(|&(_, c)| c >= 2)
    }

    pub fn max_frequency(&self) -> u32 {
        self.entries.iter().map(|&(_, c)| c).max().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
