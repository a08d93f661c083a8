//! Basic neighborhoods of the weak topology on `l2(Z)` and a fixed
//! enumeration of a countable family of them.
//!
//! # Canonical base
//!
//! The enumerated neighborhoods have a rational-coefficient center, test
//! functionals drawn from the unit vectors `e_k`, and radius `eps = 1/m`.
//! Each one is assigned a *size*
//!
//! ```text
//! size = r + m + (#tests - 1) + sum_n wt(center(n))
//! ```
//!
//! where `r` is the largest `|n|` occurring in the center support or in the
//! test indices, `wt(a/b) = |a| + b - 1` for a rational in lowest terms and
//! `wt(re + i im) = wt(re) + wt(im)`. Every size class is finite, so listing
//! the classes by increasing size reaches every neighborhood of this shape.
//!
//! Inside one class the order is fixed by nested loops, outermost first:
//!
//! 1. `r` ascending from 0;
//! 2. `m` ascending from 1;
//! 3. number of tests ascending from 1;
//! 4. test index sets in lexicographic order of their sorted index lists;
//! 5. centers, built position by position from `-r` up to `r`: at each
//!    position the coefficient weight ascends from 0, and coefficients of equal
//!    weight follow the Gaussian-rational order below.
//!
//! Candidates whose actual `r` is smaller than the loop value are skipped.
//! Rationals of weight `k >= 1` are listed by denominator `b = 1..=k`, with
//! numerator magnitude `k + 1 - b` (coprime to `b`), negative before
//! positive; weight 0 is just `0`. Gaussian rationals of weight `k` list the
//! real-part weight ascending, then real parts, then imaginary parts.
//!
//! The first entries are:
//!
//! | index | center      | tests          | eps |
//! |-------|-------------|----------------|-----|
//! | 0     | 0           | e0             | 1   |
//! | 1     | -i e0       | e0             | 1   |
//! | 2     | i e0        | e0             | 1   |
//! | 3     | -1 e0       | e0             | 1   |
//! | 4     | 1 e0        | e0             | 1   |
//! | 5     | 0           | e0             | 1/2 |
//! | 6     | 0           | e-1            | 1   |
//! | 7     | 0           | e1             | 1   |

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{rat, rational_serde, ComplexRational, Rational};
use crate::shift::{inner, SparseVector};

/// A basic weak neighborhood `{u : |<u - center, w>| < eps for all tests w}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NeighborhoodSpec {
    pub center: SparseVector,
    pub tests: Vec<SparseVector>,
    #[serde(with = "rational_serde")]
    pub eps: Rational,
}

impl NeighborhoodSpec {
    pub fn new(center: SparseVector, tests: Vec<SparseVector>, eps: Rational) -> Result<Self> {
        let spec = NeighborhoodSpec { center, tests, eps };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tests.is_empty() {
            return Err(Error::InvalidInput(
                "neighborhood needs at least one test vector".into(),
            ));
        }
        if !self.eps.is_positive() {
            return Err(Error::InvalidInput("neighborhood radius must be positive".into()));
        }
        Ok(())
    }

    pub fn eps2(&self) -> Rational {
        &self.eps * &self.eps
    }

    /// Largest `|n|` touched by the center or any test vector.
    pub fn radius(&self) -> i64 {
        std::iter::once(&self.center)
            .chain(self.tests.iter())
            .filter_map(|v| v.radius())
            .max()
            .unwrap_or(0)
    }
}

/// `|<u - v, w>|^2`.
pub fn weak_gap2(u: &SparseVector, v: &SparseVector, w: &SparseVector) -> Rational {
    inner(&u.difference(v), w).abs2()
}

/// Strict membership, decided on squared quantities.
pub fn in_neighborhood(u: &SparseVector, spec: &NeighborhoodSpec) -> bool {
    let eps2 = spec.eps2();
    spec.tests.iter().all(|w| weak_gap2(u, &spec.center, w) < eps2)
}

/// `wt(a/b) = |a| + b - 1`.
pub fn rational_weight(q: &Rational) -> u64 {
    let w = q.numer().abs() + q.denom() - 1u32;
    w.to_u64().expect("rational weight fits in u64")
}

pub fn gaussian_weight(c: &ComplexRational) -> u64 {
    rational_weight(&c.re) + rational_weight(&c.im)
}

fn rationals_of_weight(k: u64) -> Vec<Rational> {
    if k == 0 {
        return vec![Rational::zero()];
    }
    let mut out = Vec::new();
    for b in 1..=k as i64 {
        let a = k as i64 + 1 - b;
        if a >= 1 && a.gcd(&b) == 1 {
            out.push(rat(-a, b));
            out.push(rat(a, b));
        }
    }
    out
}

fn gaussians_of_weight(k: u64) -> Vec<ComplexRational> {
    let mut out = Vec::new();
    for kr in 0..=k {
        let ims = rationals_of_weight(k - kr);
        for re in rationals_of_weight(kr) {
            for im in &ims {
                out.push(ComplexRational::new(re.clone(), im.clone()));
            }
        }
    }
    out
}

/// Size of a neighborhood in the canonical base, or `None` when it is not of
/// canonical shape (tests other than distinct unit vectors, or `eps` not `1/m`).
pub fn canonical_size(spec: &NeighborhoodSpec) -> Option<u64> {
    if !spec.eps.numer().is_one() || spec.tests.is_empty() {
        return None;
    }
    let m = spec.eps.denom().to_u64()?;
    let mut idx = Vec::with_capacity(spec.tests.len());
    for t in &spec.tests {
        if t.len() != 1 {
            return None;
        }
        let (k, c) = t.iter().next()?;
        if !c.is_one() {
            return None;
        }
        idx.push(k);
    }
    if idx.windows(2).any(|w| w[0] >= w[1]) {
        return None;
    }
    let r = spec.radius() as u64;
    let wt: u64 = spec.center.iter().map(|(_, c)| gaussian_weight(c)).sum();
    Some(r + m + spec.tests.len() as u64 - 1 + wt)
}

fn combinations(pool: &[i64], t: usize, start: usize, acc: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if acc.len() == t {
        out.push(acc.clone());
        return;
    }
    for i in start..pool.len() {
        acc.push(pool[i]);
        combinations(pool, t, i + 1, acc, out);
        acc.pop();
    }
}

fn centers(positions: &[i64], budget: u64, acc: &mut Vec<(i64, ComplexRational)>, out: &mut Vec<SparseVector>) {
    let Some((&pos, rest)) = positions.split_first() else {
        if budget == 0 {
            out.push(SparseVector::from_terms(acc.iter().cloned()));
        }
        return;
    };
    for k in 0..=budget {
        for c in gaussians_of_weight(k) {
            let pushed = !c.is_zero();
            if pushed {
                acc.push((pos, c));
            }
            centers(rest, budget - k, acc, out);
            if pushed {
                acc.pop();
            }
        }
    }
}

/// All canonical neighborhoods of the given size, in canonical order.
pub fn size_class(size: u64) -> Vec<NeighborhoodSpec> {
    let mut out = Vec::new();
    for r in 0..size {
        let positions: Vec<i64> = (-(r as i64)..=r as i64).collect();
        for m in 1..=size - r {
            let max_tests = (2 * r + 1).min(size + 1 - r - m);
            for t in 1..=max_tests {
                let budget = size + 1 - r - m - t;
                let mut test_sets = Vec::new();
                combinations(&positions, t as usize, 0, &mut Vec::new(), &mut test_sets);
                let mut cs = Vec::new();
                centers(&positions, budget, &mut Vec::new(), &mut cs);
                for ts in &test_sets {
                    for c in &cs {
                        let spec = NeighborhoodSpec {
                            center: c.clone(),
                            tests: ts.iter().map(|&k| SparseVector::unit(k)).collect(),
                            eps: rat(1, m as i64),
                        };
                        if spec.radius() as u64 == r {
                            out.push(spec);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Number of canonical neighborhoods of size at most `max_size`; every such
/// neighborhood has an index strictly below this bound.
pub fn prefix_bound(max_size: u64) -> u64 {
    (1..=max_size).map(|s| size_class(s).len() as u64).sum()
}

/// Streams the canonical base in index order.
#[derive(Debug, Clone, Default)]
pub struct BaseEnumerator {
    size: u64,
    class: std::vec::IntoIter<NeighborhoodSpec>,
}

impl BaseEnumerator {
    pub fn new() -> Self {
        Self::default()
    }
}

impl Iterator for BaseEnumerator {
    type Item = NeighborhoodSpec;

    fn next(&mut self) -> Option<NeighborhoodSpec> {
        loop {
            if let Some(spec) = self.class.next() {
                return Some(spec);
            }
            self.size += 1;
            self.class = size_class(self.size).into_iter();
        }
    }
}

/// The `i`-th neighborhood of the canonical base.
pub fn enumerate_base(i: u64) -> NeighborhoodSpec {
    BaseEnumerator::new()
        .nth(i as usize)
        .expect("the enumeration is infinite")
}

/// The first `count` neighborhoods of the canonical base.
pub fn base_prefix(count: usize) -> Vec<NeighborhoodSpec> {
    BaseEnumerator::new().take(count).collect()
}

/// Inverse of [`enumerate_base`] for canonical neighborhoods.
pub fn base_index_of(spec: &NeighborhoodSpec) -> Option<u64> {
    let size = canonical_size(spec)?;
    let offset = prefix_bound(size - 1);
    let pos = size_class(size).iter().position(|s| s == spec)?;
    Some(offset + pos as u64)
}
