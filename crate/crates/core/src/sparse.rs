//! Finitely supported coefficient families indexed by the integers.
//!
//! Both point-mass measures and vectors of `l2(Z)` are stored this way; the
//! two are kept apart at the type level by a marker so a measure can never be
//! fed to an operator that expects a Hilbert-space vector.

use std::collections::BTreeMap;
use std::fmt;
use std::marker::PhantomData;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::exact::{parse_rational, rational_to_string, ComplexRational};

pub trait Kind: Clone + Send + Sync + 'static {
    /// Type tag written next to the entries when serializing.
    const TAG: &'static str;
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MeasureKind;
impl Kind for MeasureKind {
    const TAG: &'static str = "finite_measure";
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VectorKind;
impl Kind for VectorKind {
    const TAG: &'static str = "sparse_vector";
}

/// Integer-indexed family of non-zero Gaussian-rational coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Sparse<K: Kind> {
    entries: BTreeMap<i64, ComplexRational>,
    _kind: PhantomData<K>,
}

impl<K: Kind> Default for Sparse<K> {
    fn default() -> Self {
        Sparse {
            entries: BTreeMap::new(),
            _kind: PhantomData,
        }
    }
}

impl<K: Kind> Sparse<K> {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The unit at `n`: `delta_n` for measures, `e_n` for vectors.
    pub fn unit(n: i64) -> Self {
        Self::single(n, ComplexRational::one())
    }

    pub fn single(n: i64, c: ComplexRational) -> Self {
        let mut s = Self::zero();
        s.set(n, c);
        s
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, ComplexRational)>>(terms: I) -> Self {
        let mut s = Self::zero();
        for (n, c) in terms {
            s.add_at(n, &c);
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, n: i64) -> ComplexRational {
        self.entries.get(&n).cloned().unwrap_or_default()
    }

    pub fn coeff(&self, n: i64) -> Option<&ComplexRational> {
        self.entries.get(&n)
    }

    /// Overwrites the coefficient at `n`; writing zero removes the entry.
    pub fn set(&mut self, n: i64, c: ComplexRational) {
        if c.is_zero() {
            self.entries.remove(&n);
        } else {
            self.entries.insert(n, c);
        }
    }

    pub fn add_at(&mut self, n: i64, c: &ComplexRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.entries.entry(n).or_default();
        *slot += c;
        if slot.is_zero() {
            self.entries.remove(&n);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &ComplexRational)> + '_ {
        self.entries.iter().map(|(n, c)| (*n, c))
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> + '_ {
        self.entries.keys().copied()
    }

    pub fn min_index(&self) -> Option<i64> {
        self.entries.keys().next().copied()
    }

    pub fn max_index(&self) -> Option<i64> {
        self.entries.keys().next_back().copied()
    }

    /// Largest `|n|` over the support, or `None` for the zero family.
    pub fn radius(&self) -> Option<i64> {
        Some(self.min_index()?.abs().max(self.max_index()?.abs()))
    }

    pub fn scaled(&self, a: &ComplexRational) -> Self {
        if a.is_zero() {
            return Self::zero();
        }
        Self {
            entries: self.entries.iter().map(|(n, c)| (*n, c * a)).collect(),
            _kind: PhantomData,
        }
    }

    /// `a * self + b * other`, with cancelled coefficients dropped.
    pub fn combine(a: &ComplexRational, lhs: &Self, b: &ComplexRational, rhs: &Self) -> Self {
        let mut out = lhs.scaled(a);
        if !b.is_zero() {
            for (n, c) in rhs.iter() {
                out.add_at(n, &(c * b));
            }
        }
        out
    }

    pub fn sum(&self, other: &Self) -> Self {
        Self::combine(&ComplexRational::one(), self, &ComplexRational::one(), other)
    }

    pub fn difference(&self, other: &Self) -> Self {
        Self::combine(&ComplexRational::one(), self, &-ComplexRational::one(), other)
    }

    /// Entries with index in `[lo, hi]`.
    pub fn restrict(&self, lo: i64, hi: i64) -> Self {
        if lo > hi {
            return Self::zero();
        }
        Self {
            entries: self.entries.range(lo..=hi).map(|(n, c)| (*n, c.clone())).collect(),
            _kind: PhantomData,
        }
    }

    /// Moves every coefficient from `n` to `n + k` unchanged.
    pub fn translate(&self, k: i64) -> Self {
        Self {
            entries: self.entries.iter().map(|(n, c)| (n + k, c.clone())).collect(),
            _kind: PhantomData,
        }
    }

    pub fn coefficient_sum(&self) -> ComplexRational {
        let mut s = ComplexRational::zero();
        for c in self.entries.values() {
            s += c;
        }
        s
    }

    /// Reinterprets the same coefficients under another kind.
    pub fn retag<L: Kind>(&self) -> Sparse<L> {
        Sparse {
            entries: self.entries.clone(),
            _kind: PhantomData,
        }
    }
}

impl<K: Kind> fmt::Debug for Sparse<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "0");
        }
        let sym = if K::TAG == MeasureKind::TAG { "d" } else { "e" };
        let mut first = true;
        for (n, c) in &self.entries {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c}){sym}[{n}]")?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct SparseRepr {
    #[serde(rename = "type")]
    tag: String,
    entries: Vec<(i64, String, String)>,
}

impl<K: Kind> Serialize for Sparse<K> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        SparseRepr {
            tag: K::TAG.to_string(),
            entries: self
                .entries
                .iter()
                .map(|(n, c)| (*n, rational_to_string(&c.re), rational_to_string(&c.im)))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, K: Kind> Deserialize<'de> for Sparse<K> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = SparseRepr::deserialize(d)?;
        if repr.tag != K::TAG {
            return Err(D::Error::custom(format!(
                "expected type tag {:?}, found {:?}",
                K::TAG,
                repr.tag
            )));
        }
        let mut out = Self::zero();
        let mut last = None;
        for (n, re, im) in repr.entries {
            if last.is_some_and(|p| p >= n) {
                return Err(D::Error::custom("entries must be strictly sorted by index"));
            }
            last = Some(n);
            let c = ComplexRational::new(
                parse_rational(&re).map_err(D::Error::custom)?,
                parse_rational(&im).map_err(D::Error::custom)?,
            );
            if c.is_zero() {
                return Err(D::Error::custom(format!("zero coefficient stored at index {n}")));
            }
            out.set(n, c);
        }
        Ok(out)
    }
}
