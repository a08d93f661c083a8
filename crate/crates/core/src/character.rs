//! Characters `n -> z^n` of `Z`, evaluated exactly.
//!
//! Three arithmetic classes are supported: `z` off the unit circle (a Gaussian
//! rational), roots of unity `exp(2 pi i r / q)` (exact residues), and
//! irrational rotations `exp(2 pi i alpha)` known through a prefix of the
//! continued fraction of `alpha`. For the last class every position is a
//! rational interval certified from the convergents; no angle is ever stored
//! as a float.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{int, rat, rational_serde, ComplexRational, Rational};

/// Longest continued-fraction prefix accepted for an irrational rotation.
pub const MAX_CF_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Character {
    OffCircle {
        z: ComplexRational,
    },
    /// `exp(2 pi i r / q)`, with `0 <= r < q` and `gcd(r, q) = 1`.
    RootOfUnity {
        q: u64,
        r: u64,
    },
    /// `exp(2 pi i alpha)` with `alpha = [0; a_1, a_2, ...]` in `(0, 1)`.
    IrrationalRotation {
        cf: Vec<u64>,
    },
}

impl Character {
    pub fn off_circle(z: ComplexRational) -> Result<Self> {
        let ch = Character::OffCircle { z };
        ch.validate()?;
        Ok(ch)
    }

    pub fn root_of_unity(q: u64, r: i64) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidInput(format!(
                "root of unity needs order q >= 2, got {q}"
            )));
        }
        let r = r.rem_euclid(q as i64) as u64;
        let ch = Character::RootOfUnity { q, r };
        ch.validate()?;
        Ok(ch)
    }

    pub fn rotation(cf: Vec<u64>) -> Result<Self> {
        let ch = Character::IrrationalRotation { cf };
        ch.validate()?;
        Ok(ch)
    }

    /// The golden rotation `alpha = (sqrt 5 - 1) / 2 = [0; 1, 1, 1, ...]`.
    pub fn golden(depth: usize) -> Self {
        Character::IrrationalRotation { cf: vec![1; depth] }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Character::OffCircle { z } => {
                if z.is_zero() {
                    return Err(Error::InvalidInput("character base must be non-zero".into()));
                }
                if z.abs2().is_one() {
                    return Err(Error::InvalidInput("off-circle character must satisfy |z| != 1".into()));
                }
            }
            Character::RootOfUnity { q, r } => {
                if *q < 2 || r >= q || r.gcd(q) != 1 {
                    return Err(Error::InvalidInput(format!(
                        "root of unity needs q >= 2, 0 <= r < q and gcd(r, q) = 1, got q = {q}, r = {r}"
                    )));
                }
            }
            Character::IrrationalRotation { cf } => {
                if cf.is_empty() || cf.len() > MAX_CF_DEPTH {
                    return Err(Error::InvalidInput(format!(
                        "continued fraction depth must be in 1..={MAX_CF_DEPTH}, got {}",
                        cf.len()
                    )));
                }
                if cf.contains(&0) {
                    return Err(Error::InvalidInput(
                        "continued fraction coefficients must be positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Convergents `p_k / q_k` of `[0; a_1, ..., a_K]`, starting with `0/1`.
pub fn convergents(cf: &[u64]) -> Vec<(BigInt, BigInt)> {
    let mut out = vec![(BigInt::zero(), BigInt::one())];
    let (mut p_prev, mut q_prev) = (BigInt::one(), BigInt::zero());
    for &a in cf {
        let (p, q) = out.last().cloned().expect("non-empty");
        let next = (&p * a + &p_prev, &q * a + &q_prev);
        p_prev = p;
        q_prev = q;
        out.push(next);
    }
    out
}

/// Closed rational interval containing `alpha`: it lies between the deepest
/// convergent and the mediant of the last two, since every further partial
/// quotient is at least 1. Width `1 / (q_K (q_K + q_{K-1}))`.
pub fn alpha_bounds(cf: &[u64]) -> (Rational, Rational) {
    let conv = convergents(cf);
    let k = conv.len() - 1;
    let (pk, qk) = &conv[k];
    let (pp, qp) = &conv[k - 1];
    let a = Rational::new(pk.clone(), qk.clone());
    let b = Rational::new(pk + pp, qk + qp);
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Where `z^n` sits on its group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Position {
    Exact {
        value: ComplexRational,
    },
    /// `z^n = exp(2 pi i residue / q)`.
    Residue {
        residue: u64,
        q: u64,
    },
    /// `z^n = exp(2 pi i t)` for some `t` in the closed interval `[lo, hi]`
    /// inside `[0, 1]`.
    Interval {
        #[serde(with = "rational_serde")]
        lo: Rational,
        #[serde(with = "rational_serde")]
        hi: Rational,
    },
}

/// Denominator growth is slowest when every partial quotient is 1, so this
/// gives the least depth at which an interval of the required width could
/// exist.
fn needed_depth(cf: &[u64], n: i64, margin: &Rational) -> usize {
    if !margin.is_positive() {
        return cf.len() + 1;
    }
    let conv = convergents(cf);
    let (mut q_prev, mut q) = (conv[conv.len() - 2].1.clone(), conv[conv.len() - 1].1.clone());
    let n_abs = int(n.abs());
    for depth in cf.len() + 1..cf.len() + 400 {
        let next = &q + &q_prev;
        q_prev = q;
        q = next;
        let width = &n_abs / Rational::from_integer(&q * (&q + &q_prev));
        if &width < margin {
            return depth;
        }
    }
    cf.len() + 400
}

pub fn char_position(ch: &Character, n: i64) -> Result<Position> {
    ch.validate()?;
    match ch {
        Character::OffCircle { z } => Ok(Position::Exact { value: z.pow(n)? }),
        Character::RootOfUnity { q, r } => {
            let residue = (n as i128 * *r as i128).rem_euclid(*q as i128) as u64;
            Ok(Position::Residue { residue, q: *q })
        }
        Character::IrrationalRotation { cf } => {
            if n == 0 {
                return Ok(Position::Interval {
                    lo: Rational::zero(),
                    hi: Rational::zero(),
                });
            }
            let (a, b) = alpha_bounds(cf);
            let (x, y) = {
                let (u, v) = (&a * int(n), &b * int(n));
                if u < v {
                    (u, v)
                } else {
                    (v, u)
                }
            };
            let fx = x.floor();
            if fx != y.floor() {
                let mid = (&x + &y) / int(2);
                let dist = (&mid - mid.floor()).min(mid.ceil() - &mid);
                return Err(Error::InsufficientDepth {
                    n,
                    depth: cf.len(),
                    needed: needed_depth(cf, n, &dist),
                });
            }
            Ok(Position::Interval {
                lo: &x - &fx,
                hi: &y - &fx,
            })
        }
    }
}

/// Constraint on a hit time, either on the time itself or on the rotation
/// position it induces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CharConstraint {
    /// `n = residue (mod modulus)`.
    Congruence { residue: u64, modulus: u64 },
    /// The rotation position of `n` lies in `[lo, hi)`.
    Arc {
        #[serde(with = "rational_serde")]
        lo: Rational,
        #[serde(with = "rational_serde")]
        hi: Rational,
    },
}

impl CharConstraint {
    pub fn arc(lo: Rational, hi: Rational) -> Result<Self> {
        let c = CharConstraint::Arc { lo, hi };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CharConstraint::Congruence { residue, modulus } => {
                if *modulus == 0 || residue >= modulus {
                    return Err(Error::InvalidInput(format!(
                        "congruence needs 0 <= residue < modulus, got {residue} mod {modulus}"
                    )));
                }
            }
            CharConstraint::Arc { lo, hi } => {
                if lo.is_negative() || lo >= hi || hi > &Rational::one() {
                    return Err(Error::InvalidInput(format!(
                        "arc needs 0 <= lo < hi <= 1, got [{lo}, {hi})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn is_full_arc(&self) -> bool {
        matches!(self, CharConstraint::Arc { lo, hi } if lo.is_zero() && hi.is_one())
    }
}

/// Exact record of why a time satisfies a constraint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintEvidence {
    Residue {
        residue: u64,
        modulus: u64,
    },
    FullArc,
    ArcInterval {
        #[serde(with = "rational_serde")]
        lo: Rational,
        #[serde(with = "rational_serde")]
        hi: Rational,
    },
}

/// Certifies that time `n` satisfies `constraint` for `ch`; `Ok(None)` means
/// the time is not certified (either it fails or the interval is undecided).
pub fn certify_constraint(ch: &Character, constraint: &CharConstraint, n: i64) -> Result<Option<ConstraintEvidence>> {
    constraint.validate()?;
    match constraint {
        CharConstraint::Congruence { residue, modulus } => {
            let got = n.rem_euclid(*modulus as i64) as u64;
            Ok((got == *residue).then_some(ConstraintEvidence::Residue {
                residue: got,
                modulus: *modulus,
            }))
        }
        CharConstraint::Arc { lo, hi } => {
            if !matches!(ch, Character::IrrationalRotation { .. }) {
                return Err(Error::IncompatibleConstraint(
                    "arc constraints apply to irrational rotations only".into(),
                ));
            }
            if constraint.is_full_arc() {
                return Ok(Some(ConstraintEvidence::FullArc));
            }
            match char_position(ch, n) {
                Ok(Position::Interval { lo: a, hi: b }) => {
                    // closed [a, b] must sit inside the half-open arc
                    Ok((lo <= &a && &b < hi).then_some(ConstraintEvidence::ArcInterval { lo: a, hi: b }))
                }
                Ok(_) => unreachable!("rotation positions are intervals"),
                Err(Error::InsufficientDepth { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        }
    }
}

/// Exact values of `|exp(2 pi i d) - 1|^2 = 2 - 2 cos(2 pi d)`.
pub const CHORD_TABLE: [(i64, i64, i64); 4] = [(1, 2, 4), (1, 3, 3), (1, 4, 2), (1, 6, 1)];

/// Rational lower bound for the squared chord between two points of the
/// circle at circular distance at least `d` (in turns, `0 <= d <= 1/2`).
///
/// Takes the larger of the exact table entries not exceeding `d` and the
/// bound `16 d^2` from `sin(pi d) >= 2 d`.
pub fn chord2_lower(d: &Rational) -> Rational {
    let d = d.clone().max(Rational::zero()).min(rat(1, 2));
    let mut best = int(16) * &d * &d;
    for (num, den, val) in CHORD_TABLE {
        if rat(num, den) <= d {
            best = best.max(int(val));
        }
    }
    best
}

/// Circular distance in turns between residues `a` and `b` modulo `q`.
pub fn residue_distance(a: u64, b: u64, q: u64) -> Rational {
    let diff = (a as i64 - b as i64).rem_euclid(q as i64);
    let k = diff.min(q as i64 - diff);
    rat(k, q as i64)
}

/// Lower bound on the circular distance between a point of `[a_lo, a_hi)`
/// and a point of `[b_lo, b_hi)`, or `None` when the arcs overlap.
pub fn arc_gap(a: (&Rational, &Rational), b: (&Rational, &Rational)) -> Option<Rational> {
    let ((a_lo, a_hi), (b_lo, b_hi)) = if a.0 <= b.0 { (a, b) } else { (b, a) };
    if b_lo < a_hi {
        return None;
    }
    let forward = b_lo - a_hi;
    let wrap = a_lo + Rational::one() - b_hi;
    if wrap.is_negative() {
        return None;
    }
    Some(forward.min(wrap))
}

/// Smallest `k >= 0` with `k * r = target (mod q)`; requires `gcd(r, q) = 1`.
pub fn time_residue_for(target: u64, r: u64, q: u64) -> u64 {
    let inv = BigInt::from(r)
        .extended_gcd(&BigInt::from(q))
        .x
        .mod_floor(&BigInt::from(q));
    let inv = inv.to_u64().expect("residue fits");
    ((target as u128 * inv as u128) % q as u128) as u64
}
