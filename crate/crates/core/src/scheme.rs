//! Bilinear matrix multiplication schemes `(m, n, p : r)` with ternary
//! coefficients.
//!
//! Layout follows the JSON format: `u[l]` holds the `m*n` coefficients of
//! `a_ij` in product `l` (row-major, `j` fastest), `v[l]` the `n*p`
//! coefficients of `b_jk`, and `w[ik]` the `r` coefficients of the products
//! in output `c_ik`.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::system::LinearSystem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SchemeError {
    #[error("format dimensions must be positive, got ({m},{n},{p}:{r})")]
    EmptyFormat { m: usize, n: usize, p: usize, r: usize },
    #[error("tensor {tensor}: expected {expected} rows, found {found}")]
    RowCount {
        tensor: Tensor,
        expected: usize,
        found: usize,
    },
    #[error("tensor {tensor}, row {row}: expected {expected} coefficients, found {found}")]
    RowLength {
        tensor: Tensor,
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("tensor {tensor}, row {row}, position {position}: coefficient {value} is not in {{-1, 0, 1}}")]
    Coefficient {
        tensor: Tensor,
        row: usize,
        position: usize,
        value: i64,
    },
    #[error("randomized product check needs at least one trial")]
    NoTrials,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tensor {
    U,
    V,
    W,
}

impl std::fmt::Display for Tensor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Tensor::U => "u",
            Tensor::V => "v",
            Tensor::W => "w",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMethod {
    ExactBrent,
    RandomizedProduct,
}

/// Where a validity check first failed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    /// Coefficient of `a[i][j] * b[j2][k]` in `c[i2][k2]` (0-based) is `got`.
    Brent {
        a: (usize, usize),
        b: (usize, usize),
        c: (usize, usize),
        expected: i64,
        got: i64,
    },
    Coefficient {
        tensor: Tensor,
        row: usize,
        position: usize,
        value: i8,
    },
    /// Trial `trial` of the randomized product check disagreed at `c[i][k]`.
    Product { trial: usize, c: (usize, usize) },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeCheckReport {
    pub valid: bool,
    pub first_violation: Option<Violation>,
    pub method: CheckMethod,
}

impl SchemeCheckReport {
    fn pass(method: CheckMethod) -> Self {
        SchemeCheckReport {
            valid: true,
            first_violation: None,
            method,
        }
    }

    fn fail(method: CheckMethod, v: Violation) -> Self {
        SchemeCheckReport {
            valid: false,
            first_violation: Some(v),
            method,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scheme {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub r: usize,
    pub u: Vec<Vec<i8>>,
    pub v: Vec<Vec<i8>>,
    pub w: Vec<Vec<i8>>,
}

impl Scheme {
    /// Builds a scheme and checks shapes and coefficient ranges.
    pub fn new(
        (m, n, p, r): (usize, usize, usize, usize),
        u: Vec<Vec<i8>>,
        v: Vec<Vec<i8>>,
        w: Vec<Vec<i8>>,
    ) -> Result<Self, SchemeError> {
        let s = Scheme { m, n, p, r, u, v, w };
        s.check_dimensions()?;
        for (tensor, rows) in [(Tensor::U, &s.u), (Tensor::V, &s.v), (Tensor::W, &s.w)] {
            for (row, coeffs) in rows.iter().enumerate() {
                if let Some(position) = coeffs.iter().position(|c| !(-1..=1).contains(c)) {
                    return Err(SchemeError::Coefficient {
                        tensor,
                        row,
                        position,
                        value: coeffs[position] as i64,
                    });
                }
            }
        }
        Ok(s)
    }

    pub fn check_dimensions(&self) -> Result<(), SchemeError> {
        let (m, n, p, r) = (self.m, self.n, self.p, self.r);
        if m == 0 || n == 0 || p == 0 || r == 0 {
            return Err(SchemeError::EmptyFormat { m, n, p, r });
        }
        let shapes = [
            (Tensor::U, &self.u, r, m * n),
            (Tensor::V, &self.v, r, n * p),
            (Tensor::W, &self.w, m * p, r),
        ];
        for (tensor, rows, expected_rows, width) in shapes {
            if rows.len() != expected_rows {
                return Err(SchemeError::RowCount {
                    tensor,
                    expected: expected_rows,
                    found: rows.len(),
                });
            }
            for (row, coeffs) in rows.iter().enumerate() {
                if coeffs.len() != width {
                    return Err(SchemeError::RowLength {
                        tensor,
                        row,
                        expected: width,
                        found: coeffs.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// The schoolbook scheme with `m*n*p` products.
    pub fn naive(m: usize, n: usize, p: usize) -> Scheme {
        let r = m * n * p;
        let mut u = vec![vec![0i8; m * n]; r];
        let mut v = vec![vec![0i8; n * p]; r];
        let mut w = vec![vec![0i8; r]; m * p];
        let mut q = 0;
        for i in 0..m {
            for j in 0..n {
                for k in 0..p {
                    u[q][i * n + j] = 1;
                    v[q][j * p + k] = 1;
                    w[i * p + k][q] = 1;
                    q += 1;
                }
            }
        }
        Scheme { m, n, p, r, u, v, w }
    }

    /// Strassen's `(2,2,2:7)` scheme.
    pub fn strassen() -> Scheme {
        // a11 a12 a21 a22 / b11 b12 b21 b22
        let u = vec![
            vec![1, 0, 0, 1],
            vec![0, 0, 1, 1],
            vec![1, 0, 0, 0],
            vec![0, 0, 0, 1],
            vec![1, 1, 0, 0],
            vec![-1, 0, 1, 0],
            vec![0, 1, 0, -1],
        ];
        let v = vec![
            vec![1, 0, 0, 1],
            vec![1, 0, 0, 0],
            vec![0, 1, 0, -1],
            vec![-1, 0, 1, 0],
            vec![0, 0, 0, 1],
            vec![1, 1, 0, 0],
            vec![0, 0, 1, 1],
        ];
        let w = vec![
            vec![1, 0, 0, 1, -1, 0, 1],
            vec![0, 0, 1, 0, 1, 0, 0],
            vec![0, 1, 0, 1, 0, 0, 0],
            vec![1, -1, 1, 0, 0, 1, 0],
        ];
        Scheme {
            m: 2,
            n: 2,
            p: 2,
            r: 7,
            u,
            v,
            w,
        }
    }

    /// Tensor product of two schemes: format and rank multiply.
    pub fn kronecker(a: &Scheme, b: &Scheme) -> Scheme {
        let (m, n, p) = (a.m * b.m, a.n * b.n, a.p * b.p);
        let r = a.r * b.r;
        let mut u = vec![vec![0i8; m * n]; r];
        let mut v = vec![vec![0i8; n * p]; r];
        let mut w = vec![vec![0i8; r]; m * p];
        for qa in 0..a.r {
            for qb in 0..b.r {
                let q = qa * b.r + qb;
                for (ia, ja, ib, jb) in quad(a.m, a.n, b.m, b.n) {
                    u[q][(ia * b.m + ib) * n + ja * b.n + jb] =
                        a.u[qa][ia * a.n + ja] * b.u[qb][ib * b.n + jb];
                }
                for (ja, ka, jb, kb) in quad(a.n, a.p, b.n, b.p) {
                    v[q][(ja * b.n + jb) * p + ka * b.p + kb] =
                        a.v[qa][ja * a.p + ka] * b.v[qb][jb * b.p + kb];
                }
                for (ia, ka, ib, kb) in quad(a.m, a.p, b.m, b.p) {
                    w[(ia * b.m + ib) * p + ka * b.p + kb][q] =
                        a.w[ia * a.p + ka][qa] * b.w[ib * b.p + kb][qb];
                }
            }
        }
        Scheme { m, n, p, r, u, v, w }
    }

    /// Exact Brent-equation check with integer arithmetic.
    pub fn verify_brent(&self) -> Result<SchemeCheckReport, SchemeError> {
        self.check_dimensions()?;
        if let Some(v) = self.first_non_ternary() {
            return Ok(SchemeCheckReport::fail(CheckMethod::ExactBrent, v));
        }
        let (m, n, p) = (self.m, self.n, self.p);
        // Only products with a nonzero u and v coefficient contribute.
        for i in 0..m {
            for j in 0..n {
                let a = i * n + j;
                for j2 in 0..n {
                    for k in 0..p {
                        let b = j2 * p + k;
                        let active: Vec<(usize, i64)> = (0..self.r)
                            .filter_map(|q| {
                                let uv = self.u[q][a] as i64 * self.v[q][b] as i64;
                                (uv != 0).then_some((q, uv))
                            })
                            .collect();
                        for i2 in 0..m {
                            for k2 in 0..p {
                                let row = &self.w[i2 * p + k2];
                                let got: i64 =
                                    active.iter().map(|&(q, uv)| uv * row[q] as i64).sum();
                                let expected = (j == j2 && i == i2 && k == k2) as i64;
                                if got != expected {
                                    return Ok(SchemeCheckReport::fail(
                                        CheckMethod::ExactBrent,
                                        Violation::Brent {
                                            a: (i, j),
                                            b: (j2, k),
                                            c: (i2, k2),
                                            expected,
                                            got,
                                        },
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(SchemeCheckReport::pass(CheckMethod::ExactBrent))
    }

    /// Multiplies random integer matrices with entries in `[-8, 8]` through
    /// the scheme and compares against the exact product.
    pub fn verify_by_product(
        &self,
        trials: usize,
        seed: u64,
    ) -> Result<SchemeCheckReport, SchemeError> {
        if trials == 0 {
            return Err(SchemeError::NoTrials);
        }
        self.check_dimensions()?;
        if let Some(v) = self.first_non_ternary() {
            return Ok(SchemeCheckReport::fail(CheckMethod::RandomizedProduct, v));
        }
        let (m, n, p) = (self.m, self.n, self.p);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for trial in 0..trials {
            let a: Vec<i64> = (0..m * n).map(|_| rng.gen_range(-8..=8)).collect();
            let b: Vec<i64> = (0..n * p).map(|_| rng.gen_range(-8..=8)).collect();
            let c = self.apply(&a, &b);
            for i in 0..m {
                for k in 0..p {
                    let exact: i64 = (0..n).map(|j| a[i * n + j] * b[j * p + k]).sum();
                    if c[i * p + k] != exact {
                        return Ok(SchemeCheckReport::fail(
                            CheckMethod::RandomizedProduct,
                            Violation::Product { trial, c: (i, k) },
                        ));
                    }
                }
            }
        }
        Ok(SchemeCheckReport::pass(CheckMethod::RandomizedProduct))
    }

    /// Exact check for `r < 200`, else 16 randomized product trials.
    pub fn check_validity(&self, seed: u64) -> Result<SchemeCheckReport, SchemeError> {
        if self.r < 200 {
            self.verify_brent()
        } else {
            self.verify_by_product(16, seed)
        }
    }

    /// Evaluates the bilinear algorithm on row-major `a` (m x n) and `b` (n x p).
    pub fn apply(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        let products: Vec<i64> = (0..self.r)
            .map(|q| {
                let left: i64 = self.u[q].iter().zip(a).map(|(&c, &x)| c as i64 * x).sum();
                let right: i64 = self.v[q].iter().zip(b).map(|(&c, &x)| c as i64 * x).sum();
                left * right
            })
            .collect();
        self.w
            .iter()
            .map(|row| row.iter().zip(&products).map(|(&c, &x)| c as i64 * x).sum())
            .collect()
    }

    fn first_non_ternary(&self) -> Option<Violation> {
        for (tensor, rows) in [(Tensor::U, &self.u), (Tensor::V, &self.v), (Tensor::W, &self.w)] {
            for (row, coeffs) in rows.iter().enumerate() {
                if let Some(position) = coeffs.iter().position(|c| !(-1..=1).contains(c)) {
                    return Some(Violation::Coefficient {
                        tensor,
                        row,
                        position,
                        value: coeffs[position],
                    });
                }
            }
        }
        None
    }

    /// The three expression sets `E_U`, `E_V`, `E_W`.
    pub fn extract_systems(&self) -> [LinearSystem; 3] {
        [
            LinearSystem::from_dense_rows((self.m * self.n) as u32, &self.u),
            LinearSystem::from_dense_rows((self.n * self.p) as u32, &self.v),
            LinearSystem::from_dense_rows(self.r as u32, &self.w),
        ]
    }

    /// Rebuilds a scheme from its three expression sets.
    pub fn from_systems(
        (m, n, p): (usize, usize, usize),
        systems: &[LinearSystem; 3],
    ) -> Result<Scheme, SchemeError> {
        let dense = |s: &LinearSystem| -> Vec<Vec<i8>> {
            s.to_dense_rows()
                .unwrap_or_default()
                .into_iter()
                .map(|row| row.into_iter().map(|c| c.clamp(-2, 2) as i8).collect())
                .collect()
        };
        let r = systems[2].n_x() as usize;
        Scheme::new(
            (m, n, p, r),
            dense(&systems[0]),
            dense(&systems[1]),
            dense(&systems[2]),
        )
    }

    pub fn naive_costs(&self) -> [usize; 3] {
        self.extract_systems().map(|s| s.naive_cost())
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("scheme serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// Factor vector of product `q` in the given tensor.
    pub fn factor(&self, tensor: Tensor, q: usize) -> Vec<i8> {
        match tensor {
            Tensor::U => self.u[q].clone(),
            Tensor::V => self.v[q].clone(),
            Tensor::W => self.w.iter().map(|row| row[q]).collect(),
        }
    }

    fn set_factor(&mut self, tensor: Tensor, q: usize, f: &[i8]) {
        match tensor {
            Tensor::U => self.u[q].copy_from_slice(f),
            Tensor::V => self.v[q].copy_from_slice(f),
            Tensor::W => self.w.iter_mut().zip(f).for_each(|(row, &c)| row[q] = c),
        }
    }

    /// Every admissible two-term flip of this scheme.
    pub fn flips(&self) -> Vec<Flip> {
        let mut out = Vec::new();
        let factors: Vec<Vec<Vec<i8>>> = Tensor::ALL
            .iter()
            .map(|&t| (0..self.r).map(|q| self.factor(t, q)).collect())
            .collect();
        for (ti, &matched) in Tensor::ALL.iter().enumerate() {
            for q1 in 0..self.r {
                for q2 in 0..self.r {
                    if q1 == q2 {
                        continue;
                    }
                    let Some(sign) = proportional(&factors[ti][q1], &factors[ti][q2]) else {
                        continue;
                    };
                    for grow in matched.others() {
                        let shrink = matched.third(grow);
                        let (gf, sf) = (&factors[grow.index()], &factors[shrink.index()]);
                        let admissible = match (
                            combine(&gf[q1], &gf[q2], sign),
                            combine(&sf[q2], &sf[q1], -1),
                        ) {
                            (Some(g), Some(s)) => g.iter().any(|&c| c != 0) && s.iter().any(|&c| c != 0),
                            _ => false,
                        };
                        if admissible {
                            out.push(Flip {
                                matched,
                                grow,
                                q1,
                                q2,
                                sign,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Applies a flip produced by [`Scheme::flips`].
    pub fn apply_flip(&mut self, flip: &Flip) {
        let shrink = flip.matched.third(flip.grow);
        let g1 = self.factor(flip.grow, flip.q1);
        let g2 = self.factor(flip.grow, flip.q2);
        let s1 = self.factor(shrink, flip.q1);
        let s2 = self.factor(shrink, flip.q2);
        let grown: Vec<i8> = g1.iter().zip(&g2).map(|(a, b)| a + flip.sign * b).collect();
        let shrunk: Vec<i8> = s2.iter().zip(&s1).map(|(a, b)| a - b).collect();
        self.set_factor(flip.grow, flip.q1, &grown);
        self.set_factor(shrink, flip.q2, &shrunk);
    }

    /// Applies a random number of admissible flips in
    /// `[flips_min, flips_max]`. Returns an unchanged copy when no flip is
    /// admissible.
    pub fn random_flip<R: Rng>(&self, rng: &mut R, flips_min: usize, flips_max: usize) -> Scheme {
        let mut s = self.clone();
        let count = rng.gen_range(flips_min.min(flips_max)..=flips_max.max(flips_min));
        for _ in 0..count {
            let candidates = s.flips();
            let Some(flip) = candidates.choose(rng) else {
                break;
            };
            s.apply_flip(flip);
            debug_assert!(s.verify_brent().map(|r| r.valid).unwrap_or(false));
        }
        s
    }

    /// `random_flip` with the default count range `[1, 16]`.
    pub fn random_flip_default<R: Rng>(&self, rng: &mut R) -> Scheme {
        self.random_flip(rng, 1, 16)
    }
}

/// Rewrites products `q1, q2` whose factors in `matched` are equal up to
/// `sign`: `grow[q1] += sign * grow[q2]` and `shrink[q2] -= shrink[q1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Flip {
    pub matched: Tensor,
    pub grow: Tensor,
    pub q1: usize,
    pub q2: usize,
    pub sign: i8,
}

impl Tensor {
    pub const ALL: [Tensor; 3] = [Tensor::U, Tensor::V, Tensor::W];

    pub fn index(self) -> usize {
        match self {
            Tensor::U => 0,
            Tensor::V => 1,
            Tensor::W => 2,
        }
    }

    /// The tensor that is neither `self` nor `other`.
    fn third(self, other: Tensor) -> Tensor {
        Tensor::ALL
            .into_iter()
            .find(|&t| t != self && t != other)
            .expect("three tensors")
    }

    fn others(self) -> [Tensor; 2] {
        match self {
            Tensor::U => [Tensor::V, Tensor::W],
            Tensor::V => [Tensor::U, Tensor::W],
            Tensor::W => [Tensor::U, Tensor::V],
        }
    }
}

/// `Some(s)` when `b == s * a` for `s` in {1, -1} and `a` is nonzero.
fn proportional(a: &[i8], b: &[i8]) -> Option<i8> {
    if a.iter().all(|&c| c == 0) {
        return None;
    }
    if a == b {
        Some(1)
    } else if a.iter().zip(b).all(|(x, y)| *x == -*y) {
        Some(-1)
    } else {
        None
    }
}

/// `a + s * b`, or `None` if a coefficient leaves the ternary set.
fn combine(a: &[i8], b: &[i8], s: i8) -> Option<Vec<i8>> {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let c = x + s * y;
            (-1..=1).contains(&c).then_some(c)
        })
        .collect()
}

fn quad(a0: usize, a1: usize, b0: usize, b1: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..a0).flat_map(move |x| {
        (0..a1).flat_map(move |y| (0..b0).flat_map(move |z| (0..b1).map(move |t| (x, y, z, t))))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn valid(s: &Scheme) -> bool {
        s.verify_brent().unwrap().valid
    }

    #[test]
    fn strassen_is_valid() {
        let report = Scheme::strassen().verify_brent().unwrap();
        assert!(report.valid);
        assert_eq!(report.first_violation, None);
    }

    #[test]
    fn zero_scheme_is_invalid() {
        let s = Scheme {
            m: 2,
            n: 2,
            p: 2,
            r: 7,
            u: vec![vec![0; 4]; 7],
            v: vec![vec![0; 4]; 7],
            w: vec![vec![0; 7]; 4],
        };
        assert!(!valid(&s));
    }

    #[test]
    fn sign_flipped_w_coefficient_is_caught() {
        let mut s = Scheme::strassen();
        // c11 = m1 + m4 - m5 + m7; flip the m7 coefficient.
        s.w[0][6] = -1;
        let report = s.verify_brent().unwrap();
        assert!(!report.valid);
        // a12 * b21 reaches c11 only through m7.
        assert_eq!(
            report.first_violation,
            Some(Violation::Brent {
                a: (0, 1),
                b: (1, 0),
                c: (0, 0),
                expected: 1,
                got: -1
            })
        );
    }

    #[test]
    fn dimension_mismatch_names_tensor() {
        let mut s = Scheme::strassen();
        s.v.pop();
        assert_eq!(
            s.verify_brent(),
            Err(SchemeError::RowCount {
                tensor: Tensor::V,
                expected: 7,
                found: 6
            })
        );
    }

    #[test]
    fn product_check() {
        let s = Scheme::strassen();
        assert!(s.verify_by_product(10, 7).unwrap().valid);
        assert_eq!(s.verify_by_product(0, 7), Err(SchemeError::NoTrials));
        let mut bad = s.clone();
        bad.w[0][6] = -1;
        let report = bad.verify_by_product(10, 7).unwrap();
        assert!(!report.valid);
        assert_eq!(report.method, CheckMethod::RandomizedProduct);
    }

    #[test]
    fn strassen_systems_and_naive_costs() {
        let [eu, ev, ew] = Scheme::strassen().extract_systems();
        assert_eq!((eu.len(), eu.n_x()), (7, 4));
        assert_eq!((ew.len(), ew.n_x()), (4, 7));
        assert_eq!(eu.naive_cost(), 5);
        assert_eq!(ev.naive_cost(), 5);
        assert_eq!(ew.naive_cost(), 8);
    }

    #[test]
    fn one_term_rows_cost_nothing() {
        let s = Scheme::naive(2, 3, 2);
        assert!(valid(&s));
        assert_eq!(s.naive_costs(), [0, 0, 4 * (3 - 1)]);
    }

    #[test]
    fn systems_reassemble_losslessly() {
        let s = Scheme::kronecker(&Scheme::strassen(), &Scheme::naive(1, 2, 1));
        let back = Scheme::from_systems((s.m, s.n, s.p), &s.extract_systems()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn kronecker_products_are_valid() {
        let s = Scheme::kronecker(&Scheme::strassen(), &Scheme::naive(1, 2, 2));
        assert_eq!((s.m, s.n, s.p, s.r), (2, 4, 4, 28));
        assert!(valid(&s));
        let ss = Scheme::kronecker(&Scheme::strassen(), &Scheme::strassen());
        assert_eq!(ss.r, 49);
        assert!(valid(&ss));
    }

    #[test]
    fn strassen_admits_no_flip() {
        // No two Strassen factors are equal up to sign in any tensor.
        assert!(Scheme::strassen().flips().is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(Scheme::strassen().random_flip_default(&mut rng), Scheme::strassen());
    }

    #[test]
    fn flips_preserve_validity() {
        let seed = Scheme::kronecker(&Scheme::strassen(), &Scheme::naive(1, 1, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut changed = 0;
        for _ in 0..50 {
            let f = seed.random_flip_default(&mut rng);
            assert!(valid(&f));
            assert!(f.u.iter().chain(&f.v).chain(&f.w).flatten().all(|c| (-1..=1).contains(c)));
            assert_eq!(f.r, seed.r);
            changed += (f != seed) as usize;
        }
        assert!(changed > 40);
    }

    #[test]
    fn fixed_seed_flip_changes_a_strassen_product() {
        let seed = Scheme::kronecker(&Scheme::strassen(), &Scheme::naive(1, 1, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = seed.random_flip_default(&mut rng);
        assert_ne!(f, seed);
        assert_eq!(f.r, 14);
        assert!(valid(&f));
    }

    #[test]
    fn digest_is_stable_and_content_sensitive() {
        let a = Scheme::strassen();
        assert_eq!(a.digest(), Scheme::strassen().digest());
        let mut b = a.clone();
        b.w[0][6] = -1;
        assert_ne!(a.digest(), b.digest());
    }
}
