//! Two-point discontinuity witnesses for `n -> z^n` and scheduled joint hits.
//!
//! A witness is a pair of hit times `m < n` whose orbit points both lie in one
//! weak neighborhood (exactly, through builder certificates) while
//! `|z^n - z^m|^2` is bounded below by a rational. Orbit points that are
//! weakly close but whose character values stay apart is the finite form of
//! the failure of continuity.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::builder::{certify_block, plan_extend, realize, Goal, HitCertificate, StagePlan};
use crate::character::{
    arc_gap, certify_constraint, char_position, chord2_lower, residue_distance, time_residue_for, CharConstraint,
    Character, Position,
};
use crate::error::{Error, Result};
use crate::exact::{rat, rational_serde, ComplexRational, Rational};
use crate::shift::SparseVector;
use crate::weak::NeighborhoodSpec;

/// Extra hits tried for off-circle characters before giving up.
pub const OFF_CIRCLE_ATTEMPTS: u64 = 32;

/// Arc widths tried, widest first, when separating an irrational rotation.
const ARC_WIDTH_DENOMINATORS: [i64; 6] = [4, 8, 16, 32, 64, 128];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeparationMethod {
    /// `|z^n - z^m|^2` computed exactly.
    Exact,
    /// Chord table applied to the circular distance between two residues.
    ResidueChord {
        #[serde(with = "rational_serde")]
        distance: Rational,
    },
    /// Chord table applied to the gap between two arcs.
    ArcChord {
        #[serde(with = "rational_serde")]
        gap: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub character: Character,
    pub spec: NeighborhoodSpec,
    /// Block indices of the two hits in the extended plan.
    pub blocks: (usize, usize),
    /// `(n, m)` with `m < n`.
    pub times: (i64, i64),
    pub certificates: Vec<HitCertificate>,
    pub constraints: Vec<CharConstraint>,
    #[serde(with = "rational_serde")]
    pub delta: Rational,
    /// Rational lower bound on `|z^n - z^m|^2`.
    #[serde(with = "rational_serde")]
    pub separation2: Rational,
    pub method: SeparationMethod,
    pub verdict: bool,
}

/// The shared neighborhood used by witnesses: centered at the sum of its tests.
pub fn witness_spec(tests: Vec<SparseVector>, eps: Rational) -> Result<NeighborhoodSpec> {
    let center = tests.iter().fold(SparseVector::zero(), |acc, t| acc.sum(t));
    NeighborhoodSpec::new(center, tests, eps)
}

fn constrained(spec: &NeighborhoodSpec, ch: &Character, constraint: CharConstraint) -> Goal {
    Goal::ConstrainedHit {
        spec: spec.clone(),
        character: ch.clone(),
        constraint,
    }
}

fn unconstrained() -> CharConstraint {
    CharConstraint::Congruence { residue: 0, modulus: 1 }
}

fn exact_value(ch: &Character, n: i64) -> Result<ComplexRational> {
    match char_position(ch, n)? {
        Position::Exact { value } => Ok(value),
        _ => Err(Error::IncompatibleConstraint(
            "exact values exist only off the circle".into(),
        )),
    }
}

/// Separation bound recomputed from the character alone.
fn separation_of(
    ch: &Character,
    times: (i64, i64),
    constraints: &[CharConstraint],
) -> Result<(Rational, SeparationMethod)> {
    match ch {
        Character::OffCircle { .. } => {
            let d = exact_value(ch, times.0)? - exact_value(ch, times.1)?;
            Ok((d.abs2(), SeparationMethod::Exact))
        }
        Character::RootOfUnity { q, .. } => {
            let res = |n| match char_position(ch, n) {
                Ok(Position::Residue { residue, .. }) => Ok(residue),
                Ok(_) => unreachable!("roots of unity have residues"),
                Err(e) => Err(e),
            };
            let distance = residue_distance(res(times.0)?, res(times.1)?, *q);
            Ok((chord2_lower(&distance), SeparationMethod::ResidueChord { distance }))
        }
        Character::IrrationalRotation { .. } => {
            let [CharConstraint::Arc { lo: a_lo, hi: a_hi }, CharConstraint::Arc { lo: b_lo, hi: b_hi }] = constraints
            else {
                return Err(Error::IncompatibleConstraint("rotation witnesses need two arcs".into()));
            };
            let gap = arc_gap((a_lo, a_hi), (b_lo, b_hi))
                .ok_or_else(|| Error::IncompatibleConstraint("witness arcs overlap".into()))?;
            Ok((chord2_lower(&gap), SeparationMethod::ArcChord { gap }))
        }
    }
}

/// Extends `plan` with two hits of one neighborhood whose character values are
/// at least `delta` apart (compared as `delta^2`).
///
/// The neighborhood is centered at the sum of `tests`. Off the circle the
/// scheduler keeps adding hits until two consecutive ones separate; for roots
/// of unity it schedules residues `0` and `q / 2`; for irrational rotations it
/// picks the widest pair of antipodal arcs `[0, w)` and `[1/2, 1/2 + w)` whose
/// chord bound reaches `delta^2`.
pub fn discontinuity_witness(
    plan: &StagePlan,
    ch: &Character,
    tests: Vec<SparseVector>,
    eps: Rational,
    delta: Rational,
) -> Result<(StagePlan, WitnessReport)> {
    ch.validate()?;
    if delta <= Rational::zero() {
        return Err(Error::Precondition("delta must be positive".into()));
    }
    let spec = witness_spec(tests, eps)?;
    let delta2 = &delta * &delta;

    let (next, first, second, constraints) = match ch {
        Character::OffCircle { .. } => {
            let mut p = plan_extend(plan, constrained(&spec, ch, unconstrained()))?;
            let mut found = None;
            for _ in 0..OFF_CIRCLE_ATTEMPTS {
                p = plan_extend(&p, constrained(&spec, ch, unconstrained()))?;
                let k = p.blocks.len();
                let (m, n) = (p.blocks[k - 2].hit_time, p.blocks[k - 1].hit_time);
                let sep = separation_of(ch, (n, m), &[])?.0;
                if sep >= delta2 {
                    found = Some((k - 2, k - 1));
                    break;
                }
            }
            let (a, b) = found.ok_or_else(|| Error::Unsatisfiable {
                bound: OFF_CIRCLE_ATTEMPTS,
                reason: format!("no consecutive hits separated by delta^2 = {delta2}"),
            })?;
            let c = vec![unconstrained(), unconstrained()];
            (p, a, b, c)
        }
        Character::RootOfUnity { q, r } => {
            let far = q / 2;
            let c0 = CharConstraint::Congruence {
                residue: time_residue_for(0, *r, *q),
                modulus: *q,
            };
            let c1 = CharConstraint::Congruence {
                residue: time_residue_for(far, *r, *q),
                modulus: *q,
            };
            let bound = chord2_lower(&residue_distance(0, far, *q));
            if bound < delta2 {
                return Err(Error::Unsatisfiable {
                    bound: *q,
                    reason: format!("largest residue separation {bound} is below delta^2 = {delta2}"),
                });
            }
            let p = plan_extend(plan, constrained(&spec, ch, c0.clone()))?;
            let p = plan_extend(&p, constrained(&spec, ch, c1.clone()))?;
            let k = p.blocks.len();
            (p, k - 2, k - 1, vec![c0, c1])
        }
        Character::IrrationalRotation { .. } => {
            let half = rat(1, 2);
            let arcs = ARC_WIDTH_DENOMINATORS.iter().find_map(|&den| {
                let w = rat(1, den);
                let a = CharConstraint::Arc {
                    lo: Rational::zero(),
                    hi: w.clone(),
                };
                let b = CharConstraint::Arc {
                    lo: half.clone(),
                    hi: &half + &w,
                };
                let gap = &half - &w;
                (chord2_lower(&gap) >= delta2).then_some((a, b))
            });
            let (a, b) = arcs.ok_or_else(|| Error::Unsatisfiable {
                bound: ARC_WIDTH_DENOMINATORS.len() as u64,
                reason: format!("no arc pair separates by delta^2 = {delta2}"),
            })?;
            let p = plan_extend(plan, constrained(&spec, ch, a.clone()))?;
            let p = plan_extend(&p, constrained(&spec, ch, b.clone()))?;
            let k = p.blocks.len();
            (p, k - 2, k - 1, vec![a, b])
        }
    };

    let x = realize(&next);
    let certificates = vec![certify_block(&next, &x, first)?, certify_block(&next, &x, second)?];
    let times = (next.blocks[second].hit_time, next.blocks[first].hit_time);
    let (separation2, method) = separation_of(ch, times, &constraints)?;
    let verdict = certificates.iter().all(|c| c.valid) && separation2 >= delta2;
    let report = WitnessReport {
        character: ch.clone(),
        spec,
        blocks: (first, second),
        times,
        certificates,
        constraints,
        delta,
        separation2,
        method,
        verdict,
    };
    Ok((next, report))
}

/// Recomputes a witness from the plan it extended: certificates from the
/// realized vector and the separation from exact character arithmetic.
pub fn replay_witness(plan: &StagePlan, report: &WitnessReport) -> Result<bool> {
    let x = realize(plan);
    let (first, second) = report.blocks;
    if second >= plan.blocks.len() {
        return Ok(false);
    }
    let certs = vec![certify_block(plan, &x, first)?, certify_block(plan, &x, second)?];
    let times = (plan.blocks[second].hit_time, plan.blocks[first].hit_time);
    let (sep, method) = separation_of(&report.character, times, &report.constraints)?;
    let verdict = certs.iter().all(|c| c.valid) && sep >= &report.delta * &report.delta;
    Ok(certs == report.certificates
        && times == report.times
        && sep == report.separation2
        && method == report.method
        && verdict == report.verdict)
}

/// Appends one hit of `spec` whose time also satisfies `target`.
pub fn joint_density_probe(
    plan: &StagePlan,
    ch: &Character,
    spec: &NeighborhoodSpec,
    target: CharConstraint,
) -> Result<(StagePlan, i64)> {
    ch.validate()?;
    target.validate()?;
    match (ch, &target) {
        (Character::RootOfUnity { .. }, CharConstraint::Congruence { .. }) => {}
        (Character::IrrationalRotation { .. }, CharConstraint::Arc { .. }) => {}
        (Character::OffCircle { .. }, _) => {
            return Err(Error::IncompatibleConstraint(
                "off-circle characters have no compact group to constrain".into(),
            ))
        }
        (Character::RootOfUnity { .. }, CharConstraint::Arc { .. }) => {
            return Err(Error::IncompatibleConstraint(
                "roots of unity take congruence targets".into(),
            ))
        }
        (Character::IrrationalRotation { .. }, CharConstraint::Congruence { .. }) => {
            return Err(Error::IncompatibleConstraint(
                "irrational rotations take arc targets".into(),
            ))
        }
    }
    let next = plan_extend(plan, constrained(spec, ch, target.clone()))?;
    let n = next.last_hit_time().expect("one block appended");
    debug_assert!(certify_constraint(ch, &target, n)?.is_some());
    Ok((next, n))
}

/// Schedules one hit of `spec` for every residue class of a root of unity,
/// in residue order; returns the extended plan and the hit times.
pub fn residue_cover(plan: &StagePlan, ch: &Character, spec: &NeighborhoodSpec) -> Result<(StagePlan, Vec<i64>)> {
    let Character::RootOfUnity { q, r } = ch else {
        return Err(Error::IncompatibleConstraint(
            "residue covers need a root of unity".into(),
        ));
    };
    let mut next = plan.clone();
    let mut times = Vec::new();
    for target in 0..*q {
        let target = CharConstraint::Congruence {
            residue: time_residue_for(target, *r, *q),
            modulus: *q,
        };
        let (p, n) = joint_density_probe(&next, ch, spec, target)?;
        next = p;
        times.push(n);
    }
    Ok((next, times))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::certify;
    use crate::exact::int;
    use crate::weak::enumerate_base;

    fn e(n: i64) -> SparseVector {
        SparseVector::unit(n)
    }

    #[test]
    fn off_circle_two() {
        let ch = Character::off_circle(ComplexRational::from_int(2)).unwrap();
        let (plan, rep) = discontinuity_witness(&StagePlan::new(), &ch, vec![e(0), e(1)], rat(1, 2), int(1)).unwrap();
        assert!(rep.verdict);
        let (n, m) = rep.times;
        assert!(n > m && m > 0);
        let sep = (ComplexRational::from_int(2).pow(n).unwrap() - ComplexRational::from_int(2).pow(m).unwrap()).abs2();
        assert_eq!(rep.separation2, sep);
        assert!(rep.certificates.iter().all(|c| c.all_gaps_zero()));
        assert!(replay_witness(&plan, &rep).unwrap());
    }

    #[test]
    fn quarter_root_uses_opposite_residues() {
        let ch = Character::root_of_unity(4, 1).unwrap();
        let (plan, rep) = discontinuity_witness(&StagePlan::new(), &ch, vec![e(0)], rat(1, 2), int(1)).unwrap();
        let (n, m) = rep.times;
        assert_eq!((m.rem_euclid(4), n.rem_euclid(4)), (0, 2));
        assert_eq!(rep.separation2, int(4));
        assert!(rep.verdict && replay_witness(&plan, &rep).unwrap());
        // residue of i^n equals n mod 4, so |i^n - i^m|^2 = |1 - (-1)|^2 = 4 exactly
        let i = ComplexRational::i();
        assert_eq!((i.pow(n).unwrap() - i.pow(m).unwrap()).abs2(), int(4));
    }

    #[test]
    fn golden_arcs() {
        let ch = Character::golden(12);
        let (plan, rep) = discontinuity_witness(&StagePlan::new(), &ch, vec![e(0)], rat(1, 2), rat(7, 5)).unwrap();
        assert_eq!(
            rep.constraints,
            vec![
                CharConstraint::Arc {
                    lo: int(0),
                    hi: rat(1, 4)
                },
                CharConstraint::Arc {
                    lo: rat(1, 2),
                    hi: rat(3, 4)
                }
            ]
        );
        assert_eq!(rep.separation2, int(2));
        assert!(rep.times.0 <= 10_000);
        assert!(rep.verdict && replay_witness(&plan, &rep).unwrap());
    }

    #[test]
    fn tampered_witness_fails_replay() {
        let ch = Character::root_of_unity(4, 1).unwrap();
        let (plan, mut rep) = discontinuity_witness(&StagePlan::new(), &ch, vec![e(0)], rat(1, 2), int(1)).unwrap();
        rep.separation2 = int(3);
        assert!(!replay_witness(&plan, &rep).unwrap());
    }

    #[test]
    fn quarter_root_cover() {
        let ch = Character::root_of_unity(4, 1).unwrap();
        let (plan, times) = residue_cover(&StagePlan::new(), &ch, &enumerate_base(0)).unwrap();
        let residues: Vec<i64> = times.iter().map(|n| n.rem_euclid(4)).collect();
        assert_eq!(residues, vec![0, 1, 2, 3]);
        assert!(certify(&plan).unwrap().iter().all(|c| c.valid));
    }

    #[test]
    fn unsatisfiable_separation() {
        let ch = Character::root_of_unity(4, 1).unwrap();
        assert!(matches!(
            discontinuity_witness(&StagePlan::new(), &ch, vec![e(0)], rat(1, 2), int(3)),
            Err(Error::Unsatisfiable { .. })
        ));
        let tiny = Character::off_circle(rat(1, 2).into()).unwrap();
        assert!(matches!(
            discontinuity_witness(&StagePlan::new(), &tiny, vec![e(0)], rat(1, 2), int(1)),
            Err(Error::Unsatisfiable { .. })
        ));
    }

    #[test]
    fn joint_probe_residue_three() {
        let ch = Character::root_of_unity(4, 1).unwrap();
        let spec = enumerate_base(0);
        let target = CharConstraint::Congruence { residue: 3, modulus: 4 };
        let (plan, n) = joint_density_probe(&StagePlan::new(), &ch, &spec, target).unwrap();
        assert_eq!(n, 7);
        assert!(certify(&plan).unwrap()[0].valid);
    }

    #[test]
    fn joint_probe_golden_arc() {
        let ch = Character::golden(12);
        let spec = enumerate_base(3);
        let target = CharConstraint::arc(rat(1, 3), rat(1, 2)).unwrap();
        let (plan, n) = joint_density_probe(&StagePlan::new(), &ch, &spec, target).unwrap();
        let cert = &certify(&plan).unwrap()[0];
        assert!(cert.valid && cert.all_gaps_zero());
        // float cross-check of the certified position, display only
        let alpha = (5f64.sqrt() - 1.0) / 2.0;
        let frac = (n as f64 * alpha).fract();
        assert!((1.0 / 3.0..0.5).contains(&frac));
    }

    #[test]
    fn joint_probe_full_arc_takes_first_time() {
        let ch = Character::golden(12);
        let target = CharConstraint::arc(int(0), int(1)).unwrap();
        let (plan, n) = joint_density_probe(&StagePlan::new(), &ch, &enumerate_base(0), target).unwrap();
        assert_eq!(n, plan.separation_gap);
    }

    #[test]
    fn joint_probe_rejects_mismatched_kinds() {
        let spec = enumerate_base(0);
        let arc = CharConstraint::arc(int(0), rat(1, 2)).unwrap();
        let cong = CharConstraint::Congruence { residue: 1, modulus: 4 };
        let off = Character::off_circle(ComplexRational::from_int(2)).unwrap();
        let root = Character::root_of_unity(4, 1).unwrap();
        let rot = Character::golden(8);
        for (ch, t) in [(&off, &arc), (&off, &cong), (&root, &arc), (&rot, &cong)] {
            assert!(matches!(
                joint_density_probe(&StagePlan::new(), ch, &spec, t.clone()),
                Err(Error::IncompatibleConstraint(_))
            ));
        }
    }
}
