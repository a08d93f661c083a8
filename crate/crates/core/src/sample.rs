//! Seeded generators for exact test data.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::exact::{rat, ComplexRational, Rational};
use crate::measure::{FiniteMeasure, TestFunction};
use crate::shift::SparseVector;
use crate::sparse::{Kind, Sparse};

pub use rand::SeedableRng;
pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Rational `a / b` with `|a| <= height` and `1 <= b <= height`.
pub fn rational(rng: &mut SampleRng, height: i64) -> Rational {
    rat(rng.gen_range(-height..=height), rng.gen_range(1..=height))
}

pub fn gaussian(rng: &mut SampleRng, height: i64) -> ComplexRational {
    ComplexRational::new(rational(rng, height), rational(rng, height))
}

pub fn nonzero_gaussian(rng: &mut SampleRng, height: i64) -> ComplexRational {
    loop {
        let c = gaussian(rng, height);
        if !c.is_zero() {
            return c;
        }
    }
}

/// Up to `max_terms` entries on `[lo, hi]`; may be zero.
pub fn sparse<K: Kind>(rng: &mut SampleRng, lo: i64, hi: i64, max_terms: usize, height: i64) -> Sparse<K> {
    let terms = rng.gen_range(0..=max_terms);
    Sparse::from_terms(
        (0..terms)
            .map(|_| (rng.gen_range(lo..=hi), gaussian(rng, height)))
            .collect::<Vec<_>>(),
    )
}

pub fn nonzero_sparse<K: Kind>(rng: &mut SampleRng, lo: i64, hi: i64, max_terms: usize, height: i64) -> Sparse<K> {
    loop {
        let s = sparse(rng, lo, hi, max_terms.max(1), height);
        if !s.is_zero() {
            return s;
        }
    }
}

pub fn vector(rng: &mut SampleRng, radius: i64, height: i64) -> SparseVector {
    sparse(rng, -radius, radius, 8, height)
}

pub fn measure(rng: &mut SampleRng, radius: i64, height: i64) -> FiniteMeasure {
    sparse(rng, -radius, radius, 6, height)
}

/// One of the four function kinds, evaluable on `[-radius - 4, radius + 4]`.
pub fn test_function(rng: &mut SampleRng, radius: i64) -> TestFunction {
    match rng.gen_range(0..4) {
        0 => {
            let lo = -radius - 4;
            let values: Vec<_> = (lo..=radius + 4).map(|n| (n, gaussian(rng, 5))).collect();
            TestFunction::table(values)
        }
        1 => TestFunction::Constant(gaussian(rng, 5)),
        2 => TestFunction::Character {
            coeff: gaussian(rng, 4),
            base: nonzero_gaussian(rng, 3),
        },
        _ => TestFunction::Pullback {
            x: vector(rng, 6, 4),
            w: vector(rng, 3, 4),
            offset: rng.gen_range(-3..=3),
        },
    }
}
