//! Finite point-mass measures on `Z`, the shift lifting and its dual action on
//! test functions.
//!
//! A measure `mu = sum c_n delta_n` pairs with a function `g` by
//! `<g, mu> = sum c_n g(n)`. The lifting of `n -> n + 1` moves every point
//! mass one step right; on functions the adjoint reads `g -> g(. + 1)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::ComplexRational;
use crate::shift::{shift_coeff, SparseVector};
use crate::sparse::{MeasureKind, Sparse};

pub type FiniteMeasure = Sparse<MeasureKind>;

/// A function on `Z` in one of four exactly evaluable forms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum TestFunction {
    /// Values on a finite set of points; evaluating elsewhere is an error.
    Table(BTreeMap<i64, ComplexRational>),
    Constant(ComplexRational),
    /// `n -> coeff * base^n`.
    Character {
        coeff: ComplexRational,
        base: ComplexRational,
    },
    /// `n -> <T^(n + offset) x, w>` for the weighted shift `T`.
    Pullback {
        x: SparseVector,
        w: SparseVector,
        offset: i64,
    },
}

impl TestFunction {
    pub fn table<I: IntoIterator<Item = (i64, ComplexRational)>>(values: I) -> Self {
        TestFunction::Table(values.into_iter().collect())
    }

    /// Tabulates `f` on `[lo, hi]`.
    pub fn tabulate(lo: i64, hi: i64, f: impl Fn(i64) -> ComplexRational) -> Self {
        TestFunction::Table((lo..=hi).map(|n| (n, f(n))).collect())
    }

    pub fn character(base: ComplexRational) -> Self {
        TestFunction::Character {
            coeff: ComplexRational::one(),
            base,
        }
    }

    pub fn pullback(x: SparseVector, w: SparseVector) -> Self {
        TestFunction::Pullback { x, w, offset: 0 }
    }

    pub fn eval(&self, n: i64) -> Result<ComplexRational> {
        match self {
            TestFunction::Table(t) => t.get(&n).cloned().ok_or(Error::NotEvaluable { point: n }),
            TestFunction::Constant(c) => Ok(c.clone()),
            TestFunction::Character { coeff, base } => {
                let p = base.pow(n).map_err(|_| Error::NotEvaluable { point: n })?;
                Ok(coeff * p)
            }
            TestFunction::Pullback { x, w, offset } => {
                let k = n + offset;
                let mut acc = ComplexRational::zero();
                for (m, wm) in w.iter() {
                    let c = shift_coeff(x, k, m);
                    if !c.is_zero() {
                        acc += &(c * wm.conj());
                    }
                }
                Ok(acc)
            }
        }
    }

    /// Constants and pullbacks are continuous for the orbit topology; tables
    /// and characters are not certified.
    pub fn is_certified(&self) -> bool {
        matches!(self, TestFunction::Constant(_) | TestFunction::Pullback { .. })
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TestFunction::Constant(_))
    }
}

/// Polynomial with Gaussian-rational coefficients, constant term first.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    coeffs: Vec<ComplexRational>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<ComplexRational>) -> Self {
        while coeffs.last().is_some_and(ComplexRational::is_zero) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| ComplexRational::from_int(v)).collect())
    }

    pub fn coeffs(&self) -> &[ComplexRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports `None`.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, t: &ComplexRational) -> ComplexRational {
        self.coeffs
            .iter()
            .rev()
            .fold(ComplexRational::zero(), |acc, c| &acc * t + c)
    }
}

pub fn measure_combine(
    a: &ComplexRational,
    mu: &FiniteMeasure,
    b: &ComplexRational,
    nu: &FiniteMeasure,
) -> FiniteMeasure {
    FiniteMeasure::combine(a, mu, b, nu)
}

/// `mu(Z)`; the measure lies in the zero-mass hyperplane iff this vanishes.
pub fn total_mass(mu: &FiniteMeasure) -> ComplexRational {
    mu.coefficient_sum()
}

pub fn in_zero_mass_hyperplane(mu: &FiniteMeasure) -> bool {
    total_mass(mu).is_zero()
}

/// `<g, mu> = sum_j c_j g(x_j)`.
pub fn pair(g: &TestFunction, mu: &FiniteMeasure) -> Result<ComplexRational> {
    let mut acc = ComplexRational::zero();
    for (n, c) in mu.iter() {
        acc += &(c * g.eval(n)?);
    }
    Ok(acc)
}

/// `T_f^k mu` for the lifting of `f(n) = n + 1`: the mass at `n` moves to `n + k`.
pub fn pushforward(mu: &FiniteMeasure, k: i64) -> FiniteMeasure {
    mu.translate(k)
}

/// `p(T_f) mu = sum_j p_j T_f^j mu`.
pub fn apply_poly(p: &Polynomial, mu: &FiniteMeasure) -> FiniteMeasure {
    let mut out = FiniteMeasure::zero();
    for (j, pj) in p.coeffs().iter().enumerate() {
        if pj.is_zero() {
            continue;
        }
        for (n, c) in mu.iter() {
            out.add_at(n + j as i64, &(c * pj));
        }
    }
    out
}

/// Writes `mu = p(T_f) delta_{-l}` with the symmetric bound
/// `l = max(|min supp mu|, |max supp mu|)`; `p_j` is the coefficient of
/// `delta_{j - l}`.
pub fn decompose(mu: &FiniteMeasure) -> Result<(u64, Polynomial)> {
    let l = mu.radius().ok_or(Error::ZeroMeasure)?;
    let coeffs = (0..=2 * l).map(|j| mu.get(j - l)).collect();
    Ok((l as u64, Polynomial::new(coeffs)))
}

/// The adjoint action `(T_f'^k g)(n) = g(n + k)`.
pub fn dual_shift(g: &TestFunction, k: i64) -> Result<TestFunction> {
    Ok(match g {
        TestFunction::Table(t) => TestFunction::Table(t.iter().map(|(n, c)| (n - k, c.clone())).collect()),
        TestFunction::Constant(c) => TestFunction::Constant(c.clone()),
        TestFunction::Character { coeff, base } => {
            let scale = base
                .pow(k)
                .map_err(|_| Error::Precondition("character with zero base cannot be shifted backwards".into()))?;
            TestFunction::Character {
                coeff: coeff * scale,
                base: base.clone(),
            }
        }
        TestFunction::Pullback { x, w, offset } => TestFunction::Pullback {
            x: x.clone(),
            w: w.clone(),
            offset: offset + k,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::cr;

    fn d(n: i64) -> FiniteMeasure {
        FiniteMeasure::unit(n)
    }

    fn c(n: i64) -> ComplexRational {
        ComplexRational::from_int(n)
    }

    fn m(terms: &[(i64, i64)]) -> FiniteMeasure {
        FiniteMeasure::from_terms(terms.iter().map(|&(n, v)| (n, c(v))))
    }

    #[test]
    fn combine_examples() {
        let mu = m(&[(1, 1), (0, -1)]);
        assert_eq!(measure_combine(&c(2), &mu, &c(-1), &d(1)), m(&[(1, 1), (0, -2)]));
        assert!(measure_combine(&c(0), &mu, &c(0), &d(7)).is_zero());
        assert!(measure_combine(&c(1), &d(3), &c(1), &m(&[(3, -1)])).is_zero());
    }

    #[test]
    fn mass_examples() {
        assert_eq!(total_mass(&d(3)), c(1));
        assert!(in_zero_mass_hyperplane(&m(&[(1, 1), (0, -1)])));
        assert_eq!(total_mass(&m(&[(0, 2), (5, 3)])), c(5));
    }

    #[test]
    fn pairing_examples() {
        let sq = TestFunction::tabulate(-10, 10, |n| c(n * n));
        assert_eq!(pair(&sq, &m(&[(3, 1), (0, -1)])).unwrap(), c(9));
        let one = TestFunction::Constant(c(1));
        assert!(pair(&one, &m(&[(4, 3), (-2, -1), (0, -2)])).unwrap().is_zero());
        let two = TestFunction::character(c(2));
        assert_eq!(pair(&two, &m(&[(2, 1), (-1, 1)])).unwrap(), cr(9, 2, 0, 1));
    }

    #[test]
    fn pairing_outside_table_names_point() {
        let g = TestFunction::table([(0, c(1))]);
        assert_eq!(pair(&g, &d(4)), Err(Error::NotEvaluable { point: 4 }));
    }

    #[test]
    fn pushforward_examples() {
        assert_eq!(pushforward(&d(0), 1), d(1));
        assert_eq!(pushforward(&d(1), -1), d(0));
        assert_eq!(pushforward(&m(&[(0, 1), (-2, -1)]), 2), m(&[(2, 1), (0, -1)]));
    }

    #[test]
    fn apply_poly_examples() {
        assert_eq!(
            apply_poly(&Polynomial::from_ints(&[-1, 0, 1]), &d(0)),
            m(&[(2, 1), (0, -1)])
        );
        let mu = m(&[(4, 3), (-1, 2)]);
        assert_eq!(apply_poly(&Polynomial::from_ints(&[1]), &mu), mu);
        assert_eq!(
            apply_poly(&Polynomial::from_ints(&[0, 2]), &m(&[(-1, 1), (0, -1)])),
            m(&[(0, 2), (1, -2)])
        );
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(decompose(&d(0)).unwrap(), (0, Polynomial::from_ints(&[1])));
        let mu = m(&[(1, 1), (-1, -1)]);
        let (l, p) = decompose(&mu).unwrap();
        assert_eq!((l, &p), (1, &Polynomial::from_ints(&[-1, 0, 1])));
        assert_eq!(apply_poly(&p, &d(-(l as i64))), mu);
        let mu = m(&[(2, 2)]);
        let (l, p) = decompose(&mu).unwrap();
        assert_eq!((l, &p), (2, &Polynomial::from_ints(&[0, 0, 0, 0, 2])));
        assert_eq!(apply_poly(&p, &d(-2)), mu);
        assert_eq!(decompose(&FiniteMeasure::zero()), Err(Error::ZeroMeasure));
    }

    #[test]
    fn dual_shift_examples() {
        let id = TestFunction::tabulate(-5, 5, c);
        let shifted = dual_shift(&id, 1).unwrap();
        for n in -6..=4 {
            assert_eq!(shifted.eval(n).unwrap(), c(n + 1));
        }
        let z = cr(1, 2, 3, 1);
        let ch = TestFunction::character(z.clone());
        assert_eq!(
            dual_shift(&ch, 1).unwrap(),
            TestFunction::Character {
                coeff: z.clone(),
                base: z
            }
        );
        let t = TestFunction::table([(0, c(1))]);
        assert_eq!(dual_shift(&t, 1).unwrap(), TestFunction::table([(-1, c(1))]));
    }

    #[test]
    fn pullback_evaluates_through_shift() {
        // x = e_3, w = e_0: <T^n e_3, e_0> is 8 at n = 3 and 0 elsewhere
        let g = TestFunction::pullback(SparseVector::unit(3), SparseVector::unit(0));
        assert_eq!(g.eval(3).unwrap(), c(8));
        assert!(g.eval(2).unwrap().is_zero());
        let h = dual_shift(&g, 2).unwrap();
        assert_eq!(h.eval(1).unwrap(), c(8));
        assert_eq!(Polynomial::from_ints(&[1, 2, 0, 0]).degree(), Some(1));
        assert_eq!(Polynomial::from_ints(&[2, 0, 1]).eval(&c(3)), c(11));
    }

    #[test]
    fn test_function_serialization() {
        let f = TestFunction::Constant(c(3));
        assert_eq!(
            serde_json::to_string(&f).unwrap(),
            r#"{"kind":"constant","payload":{"re":"3","im":"0"}}"#
        );
        let g = TestFunction::pullback(SparseVector::unit(1), SparseVector::unit(0));
        let back: TestFunction = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }
}
