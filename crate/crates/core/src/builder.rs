//! Finite-stage construction of a vector whose shift orbit hits a prescribed
//! list of weak neighborhoods, with exact certificates.
//!
//! The vector is `x = sum_j T^(-n_j) v_j`, where each payload `v_j` is
//! supported in the window `[-R, R]` and the hit times `n_j` are pairwise at
//! least `G > 2R + 1` apart (and as far from every other time a certificate
//! refers to). Then `T^(n_j) x` agrees with `v_j` on the window: every other
//! block is pushed at least `G - R > R + 1` indices away. Tests supported in
//! the window therefore see exactly the payload, and later blocks never
//! disturb an earlier certificate.

use std::collections::BTreeSet;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::character::{certify_constraint, CharConstraint, Character, ConstraintEvidence};
use crate::error::{Error, Result};
use crate::exact::{rational_serde, rational_vec_serde, Rational};
use crate::shift::{shift_apply, SparseVector};
use crate::weak::{weak_gap2, NeighborhoodSpec};

/// Number of candidate times examined by one extension before giving up.
pub const HIT_SEARCH_BOUND: u64 = 1_000_000;

/// Label carried by build reports: the orbit is scheduled block by block here,
/// it is not taken from a non-constructive existence argument.
pub const CONSTRUCTION_NOTE: &str = "independent scheduled construction standing in for an existence result";

pub const INITIAL_RADIUS: i64 = 1;
pub const INITIAL_GAP: i64 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Goal {
    /// Some `T^n x`, `n > 0`, in the neighborhood.
    Hit { spec: NeighborhoodSpec },
    /// Some `T^n x`, `n > 0`, weakly within `eps` of `T^m x` on every test.
    ZPlusDensity {
        m: i64,
        tests: Vec<SparseVector>,
        #[serde(with = "rational_serde")]
        eps: Rational,
    },
    /// A hit whose time also satisfies a character constraint.
    ConstrainedHit {
        spec: NeighborhoodSpec,
        character: Character,
        constraint: CharConstraint,
    },
}

impl Goal {
    pub fn validate(&self) -> Result<()> {
        match self {
            Goal::Hit { spec } => spec.validate(),
            Goal::ZPlusDensity { tests, eps, .. } => {
                NeighborhoodSpec::new(SparseVector::zero(), tests.clone(), eps.clone()).map(drop)
            }
            Goal::ConstrainedHit {
                spec,
                character,
                constraint,
            } => {
                spec.validate()?;
                character.validate()?;
                constraint.validate()
            }
        }
    }

    /// Radius the window must have to contain all of the goal's data.
    pub fn radius(&self) -> i64 {
        match self {
            Goal::Hit { spec } | Goal::ConstrainedHit { spec, .. } => spec.radius(),
            Goal::ZPlusDensity { tests, .. } => tests.iter().filter_map(|t| t.radius()).max().unwrap_or(0),
        }
    }

    fn tests(&self) -> &[SparseVector] {
        match self {
            Goal::Hit { spec } | Goal::ConstrainedHit { spec, .. } => &spec.tests,
            Goal::ZPlusDensity { tests, .. } => tests,
        }
    }

    fn eps2(&self) -> Rational {
        match self {
            Goal::Hit { spec } | Goal::ConstrainedHit { spec, .. } => spec.eps2(),
            Goal::ZPlusDensity { eps, .. } => eps * eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub goal: Goal,
    pub hit_time: i64,
    pub payload: SparseVector,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthEvent {
    /// Index of the block whose goal forced the growth.
    pub block: usize,
    pub radius_before: i64,
    pub radius_after: i64,
    pub gap_before: i64,
    pub gap_after: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StagePlan {
    pub window_radius: i64,
    pub separation_gap: i64,
    pub blocks: Vec<Block>,
    pub growth_events: Vec<GrowthEvent>,
}

impl Default for StagePlan {
    fn default() -> Self {
        StagePlan {
            window_radius: INITIAL_RADIUS,
            separation_gap: INITIAL_GAP,
            blocks: Vec::new(),
            growth_events: Vec::new(),
        }
    }
}

impl StagePlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last_hit_time(&self) -> Option<i64> {
        self.blocks.last().map(|b| b.hit_time)
    }

    /// Times a certificate may refer to: 0, every hit time and every
    /// reference time of a density goal.
    pub fn referenced_times(&self) -> BTreeSet<i64> {
        let mut times = BTreeSet::from([0]);
        for b in &self.blocks {
            times.insert(b.hit_time);
            if let Goal::ZPlusDensity { m, .. } = b.goal {
                times.insert(m);
            }
        }
        times
    }

    /// Checks the structural invariants every extension maintains.
    pub fn check_invariants(&self) -> Result<()> {
        let (r, g) = (self.window_radius, self.separation_gap);
        if r < 1 || g <= 2 * r + 1 {
            return Err(Error::InvalidInput(format!(
                "need R >= 1 and G > 2R + 1, got R = {r}, G = {g}"
            )));
        }
        let times: Vec<i64> = self.referenced_times().into_iter().collect();
        for b in &self.blocks {
            if b.hit_time <= 0 {
                return Err(Error::InvalidInput(format!("hit time {} is not positive", b.hit_time)));
            }
            if b.payload.radius().unwrap_or(0) > r || b.goal.radius() > r {
                return Err(Error::InvalidInput(format!(
                    "block at {} exceeds window radius {r}",
                    b.hit_time
                )));
            }
        }
        if self.blocks.windows(2).any(|w| w[1].hit_time <= w[0].hit_time) {
            return Err(Error::InvalidInput("hit times must be strictly increasing".into()));
        }
        if times.windows(2).any(|w| w[1] - w[0] < g) {
            return Err(Error::InvalidInput(format!("referenced times closer than the gap {g}")));
        }
        Ok(())
    }
}

fn admissible_time(plan: &StagePlan, goal: &Goal, extra_refs: &[i64]) -> Result<(i64, Option<ConstraintEvidence>)> {
    let g = plan.separation_gap;
    let refs: Vec<i64> = plan
        .referenced_times()
        .into_iter()
        .chain(extra_refs.iter().copied())
        .collect();
    let start = plan.last_hit_time().map_or(1, |t| t + 1);
    let mut n = start;
    for _ in 0..HIT_SEARCH_BOUND {
        // jump past the closest reference that blocks n
        if let Some(block) = refs.iter().filter(|&&t| (n - t).abs() < g).max() {
            n = block + g;
            continue;
        }
        match goal {
            Goal::ConstrainedHit {
                character, constraint, ..
            } => {
                if let Some(ev) = certify_constraint(character, constraint, n)? {
                    return Ok((n, Some(ev)));
                }
            }
            _ => return Ok((n, None)),
        }
        n += 1;
    }
    Err(Error::Unsatisfiable {
        bound: HIT_SEARCH_BOUND,
        reason: format!("no certified constrained time found from {start}"),
    })
}

/// Appends one block realizing `goal`, enlarging the window and gap first if
/// the goal does not fit.
pub fn plan_extend(plan: &StagePlan, goal: Goal) -> Result<StagePlan> {
    goal.validate()?;
    let mut next = plan.clone();
    let needed = goal.radius();
    let (r0, g0) = (next.window_radius, next.separation_gap);
    while next.window_radius < needed {
        next.window_radius *= 2;
    }
    while next.separation_gap <= 2 * next.window_radius + 1 {
        next.separation_gap *= 2;
    }
    if (r0, g0) != (next.window_radius, next.separation_gap) {
        next.growth_events.push(GrowthEvent {
            block: next.blocks.len(),
            radius_before: r0,
            radius_after: next.window_radius,
            gap_before: g0,
            gap_after: next.separation_gap,
        });
    }
    let r = next.window_radius;
    let (payload, extra_refs) = match &goal {
        Goal::Hit { spec } | Goal::ConstrainedHit { spec, .. } => (spec.center.restrict(-r, r), vec![]),
        Goal::ZPlusDensity { m, .. } => (shift_apply(&realize(plan), *m).restrict(-r, r), vec![*m]),
    };
    let (hit_time, _) = admissible_time(&next, &goal, &extra_refs)?;
    next.blocks.push(Block {
        goal,
        hit_time,
        payload,
    });
    Ok(next)
}

/// `x = sum_j T^(-n_j) v_j`.
pub fn realize(plan: &StagePlan) -> SparseVector {
    plan.blocks.iter().fold(SparseVector::zero(), |acc, b| {
        acc.sum(&shift_apply(&b.payload, -b.hit_time))
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapFailure {
    pub test: usize,
    #[serde(with = "rational_serde")]
    pub gap2: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HitCertificate {
    pub goal_index: usize,
    pub goal: Goal,
    pub hit_time: i64,
    /// Time of the reference orbit point for density goals.
    pub reference_time: Option<i64>,
    #[serde(with = "rational_vec_serde")]
    pub gaps2: Vec<Rational>,
    #[serde(with = "rational_serde")]
    pub eps2: Rational,
    pub constraint: Option<ConstraintEvidence>,
    pub valid: bool,
    pub failure: Option<GapFailure>,
}

impl HitCertificate {
    pub fn all_gaps_zero(&self) -> bool {
        self.gaps2.iter().all(Zero::is_zero)
    }
}

/// Recomputes the certificate of block `index` from the realized vector.
pub fn certify_block(plan: &StagePlan, x: &SparseVector, index: usize) -> Result<HitCertificate> {
    let block = &plan.blocks[index];
    let orbit_point = shift_apply(x, block.hit_time);
    let (reference, reference_time) = match &block.goal {
        Goal::Hit { spec } | Goal::ConstrainedHit { spec, .. } => (spec.center.clone(), None),
        Goal::ZPlusDensity { m, .. } => (shift_apply(x, *m), Some(*m)),
    };
    let eps2 = block.goal.eps2();
    let gaps2: Vec<Rational> = block
        .goal
        .tests()
        .iter()
        .map(|w| weak_gap2(&orbit_point, &reference, w))
        .collect();
    let failure = gaps2.iter().position(|g| g >= &eps2).map(|test| GapFailure {
        test,
        gap2: gaps2[test].clone(),
    });
    let constraint = match &block.goal {
        Goal::ConstrainedHit {
            character, constraint, ..
        } => certify_constraint(character, constraint, block.hit_time)?,
        _ => None,
    };
    let constraint_ok = !matches!(block.goal, Goal::ConstrainedHit { .. }) || constraint.is_some();
    Ok(HitCertificate {
        goal_index: index,
        goal: block.goal.clone(),
        hit_time: block.hit_time,
        reference_time,
        gaps2,
        eps2,
        constraint,
        valid: failure.is_none() && constraint_ok && block.hit_time > 0,
        failure,
    })
}

/// Certificates for every block, in plan order.
pub fn certify(plan: &StagePlan) -> Result<Vec<HitCertificate>> {
    let x = realize(plan);
    (0..plan.blocks.len()).map(|i| certify_block(plan, &x, i)).collect()
}

/// Builds a plan by extending the empty plan with each goal in turn.
pub fn build(goals: impl IntoIterator<Item = Goal>) -> Result<StagePlan> {
    goals
        .into_iter()
        .try_fold(StagePlan::new(), |plan, g| plan_extend(&plan, g))
}
