//! The weighted bilateral shift on finitely supported vectors of `l2(Z)`.
//!
//! `T e_n = w(n) e_{n-1}` with `w(n) = 1` for `n <= 0` and `w(n) = 2` for
//! `n > 0`. Powers are applied in closed form: moving a coefficient across
//! `j` positive indices multiplies (forward) or divides (backward) it by `2^j`.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::exact::{pow2, rational_serde, ComplexRational, Rational};
use crate::sparse::{Sparse, VectorKind};

pub type SparseVector = Sparse<VectorKind>;

/// The shift weight `w(n)`.
pub fn weight(n: i64) -> i64 {
    if n > 0 {
        2
    } else {
        1
    }
}

/// Number of positive integers in `[a, b]`.
fn positives_in(a: i64, b: i64) -> i64 {
    let lo = a.max(1);
    if b < lo {
        0
    } else {
        b - lo + 1
    }
}

/// `log2` of the factor picked up by the coefficient at index `n` under `T^k`.
fn weight_exponent(n: i64, k: i64) -> i64 {
    if k >= 0 {
        positives_in(n - k + 1, n)
    } else {
        -positives_in(n + 1, n - k)
    }
}

/// `T^k u` for any integer `k`.
pub fn shift_apply(u: &SparseVector, k: i64) -> SparseVector {
    if k == 0 {
        return u.clone();
    }
    SparseVector::from_terms(u.iter().map(|(n, c)| (n - k, c.scale(&pow2(weight_exponent(n, k))))))
}

/// Coefficient of `T^k u` at index `m`, without materializing the whole vector.
pub fn shift_coeff(u: &SparseVector, k: i64, m: i64) -> ComplexRational {
    match u.coeff(m + k) {
        Some(c) => c.scale(&pow2(weight_exponent(m + k, k))),
        None => ComplexRational::zero(),
    }
}

/// Hilbert pairing `sum_n u(n) * conj(v(n))`.
pub fn inner(u: &SparseVector, v: &SparseVector) -> ComplexRational {
    let (small, large, swap) = if u.len() <= v.len() {
        (u, v, false)
    } else {
        (v, u, true)
    };
    let mut acc = ComplexRational::zero();
    for (n, a) in small.iter() {
        if let Some(b) = large.coeff(n) {
            if swap {
                acc += &(b * a.conj());
            } else {
                acc += &(a * b.conj());
            }
        }
    }
    acc
}

/// Squared norm `<u, u>`.
pub fn norm2(u: &SparseVector) -> Rational {
    u.iter().fold(Rational::zero(), |acc, (_, c)| acc + c.abs2())
}

/// Squared mass carried by the positive indices, `sum_{n > 0} |u(n)|^2`.
pub fn positive_mass2(u: &SparseVector) -> Rational {
    u.iter()
        .filter(|(n, _)| *n > 0)
        .fold(Rational::zero(), |acc, (_, c)| acc + c.abs2())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormStep {
    pub n: i64,
    #[serde(with = "rational_serde")]
    pub norm2: Rational,
    /// `norm2(T^(n+1) u) > norm2(T^n u)`.
    pub strict: bool,
}

/// Squared norms of `T^n u` for `n` in `[n_lo, n_hi]`, each flagged with
/// whether the next power is strictly larger.
pub fn norm_monotonicity_report(u: &SparseVector, n_lo: i64, n_hi: i64) -> Vec<NormStep> {
    assert!(n_lo <= n_hi, "empty window [{n_lo}, {n_hi}]");
    let mut current = shift_apply(u, n_lo);
    let mut current_norm = norm2(&current);
    let mut out = Vec::with_capacity((n_hi - n_lo + 1) as usize);
    for n in n_lo..=n_hi {
        let next = shift_apply(&current, 1);
        let next_norm = norm2(&next);
        out.push(NormStep {
            n,
            norm2: current_norm.clone(),
            strict: next_norm > current_norm,
        });
        current = next;
        current_norm = next_norm;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{cr, int, rat};

    fn e(n: i64) -> SparseVector {
        SparseVector::unit(n)
    }

    /// One application of `T` straight from `T e_n = w(n) e_{n-1}`.
    fn step_forward(u: &SparseVector) -> SparseVector {
        SparseVector::from_terms(u.iter().map(|(n, c)| (n - 1, c.scale(&int(weight(n))))))
    }

    /// One application of `T^{-1}`: `T^{-1} e_m = e_{m+1} / w(m+1)`.
    fn step_back(u: &SparseVector) -> SparseVector {
        SparseVector::from_terms(u.iter().map(|(m, c)| (m + 1, c.scale(&rat(1, weight(m + 1))))))
    }

    #[test]
    fn defining_relations() {
        assert_eq!(shift_apply(&e(1), 1), SparseVector::single(0, cr(2, 1, 0, 1)));
        assert_eq!(shift_apply(&e(0), 1), e(-1));
        assert_eq!(shift_apply(&e(0), -1), SparseVector::single(1, cr(1, 2, 0, 1)));
        assert_eq!(shift_apply(&e(-3), -1), e(-2));
    }

    #[test]
    fn closed_form_matches_repeated_steps() {
        let u = SparseVector::from_terms([
            (-4, cr(1, 3, 2, 1)),
            (0, cr(-5, 1, 0, 1)),
            (2, cr(0, 1, 7, 4)),
            (9, cr(1, 1, 1, 1)),
        ]);
        let mut fwd = u.clone();
        let mut back = u.clone();
        for k in 1..=20 {
            fwd = step_forward(&fwd);
            back = step_back(&back);
            assert_eq!(shift_apply(&u, k), fwd, "k = {k}");
            assert_eq!(shift_apply(&u, -k), back, "k = -{k}");
            for m in -30..30 {
                assert_eq!(shift_coeff(&u, k, m), fwd.get(m));
                assert_eq!(shift_coeff(&u, -k, m), back.get(m));
            }
        }
    }

    #[test]
    fn inner_products() {
        assert!(inner(&e(0), &e(1)).is_zero());
        let v = SparseVector::from_terms([(5, cr(1, 1, 0, 1)), (-2, cr(1, 2, 0, 1))]);
        assert_eq!(inner(&v, &v), cr(5, 4, 0, 1));
        let a = SparseVector::from_terms([(0, cr(1, 1, 2, 1)), (1, cr(0, 1, 1, 3))]);
        let b = SparseVector::from_terms([(0, cr(3, 1, -1, 1)), (1, cr(2, 1, 0, 1))]);
        assert_eq!(inner(&a, &b), inner(&b, &a).conj());
    }

    #[test]
    fn negative_span_is_flat() {
        let r = norm_monotonicity_report(&e(-1), 0, 3);
        assert!(r.iter().all(|s| s.norm2 == int(1) && !s.strict));
    }

    #[test]
    fn positive_unit_grows_then_flattens() {
        let r = norm_monotonicity_report(&e(2), 0, 3);
        let norms: Vec<_> = r.iter().map(|s| s.norm2.clone()).collect();
        assert_eq!(norms, vec![int(1), int(4), int(16), int(16)]);
        let flags: Vec<_> = r.iter().map(|s| s.strict).collect();
        assert_eq!(flags, vec![true, true, false, false]);
    }

    #[test]
    fn mixed_vector_increases_while_positive_mass_remains() {
        let u = e(0).sum(&e(3));
        let r = norm_monotonicity_report(&u, 0, 2);
        // T^n u = e_{-n} + 2^n e_{3-n}: norms 2, 5, 17, 65
        let norms: Vec<_> = r.iter().map(|s| s.norm2.clone()).collect();
        assert_eq!(norms, vec![int(2), int(5), int(17)]);
        assert!(r.iter().all(|s| s.strict));
    }
}
