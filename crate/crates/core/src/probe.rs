//! Finite-stage search for obstructions to cyclicity of `mu` under the
//! shift lifting.
//!
//! A non-cyclic `mu` would have a non-constant continuous annihilator `g` of
//! its forward orbit. The probe looks for such `g` inside the span of a finite
//! family, reduces each candidate along `p(T')g = 0` to an eigenfunction
//! `h(n) = z^n`, and refutes the continuity of `n -> z^n` with a witness.

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::builder::{realize, StagePlan};
use crate::character::Character;
use crate::elim::{independent_subset, nullspace, transpose, Matrix};
use crate::error::{Error, Result};
use crate::exact::{rat, ComplexRational, Rational};
use crate::measure::{decompose, in_zero_mass_hyperplane, pair, pushforward, FiniteMeasure, Polynomial, TestFunction};
use crate::shift::SparseVector;
use crate::witness::{discontinuity_witness, WitnessReport};

pub const DISCLAIMER: &str = "Stage-limited evidence only. The family is finite and the orbit is \
checked for n = 0..N, so an empty annihilator space shows that no combination of these members \
annihilates the first N + 1 orbit points. It does not decide cyclicity: vanishing up to N is \
weaker than vanishing on all of Z+, and no finite family exhausts the continuous functions.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionFamily {
    pub members: Vec<TestFunction>,
    /// Demo families may hold tables and characters; their reports are
    /// flagged as not certified.
    pub demo: bool,
}

impl FunctionFamily {
    /// Accepts constants and pullbacks only.
    pub fn certified(members: Vec<TestFunction>) -> Result<Self> {
        if let Some(i) = members.iter().position(|g| !g.is_certified()) {
            return Err(Error::InvalidInput(format!(
                "member {i} is not a certified-continuous kind"
            )));
        }
        Ok(FunctionFamily { members, demo: false })
    }

    pub fn demo(members: Vec<TestFunction>) -> Self {
        FunctionFamily { members, demo: true }
    }

    /// Pullbacks `n -> <T^n x, w>` against the realized vector of `plan`.
    pub fn pullbacks(plan: &StagePlan, tests: &[SparseVector]) -> Self {
        let x = realize(plan);
        let members = tests
            .iter()
            .map(|w| TestFunction::pullback(x.clone(), w.clone()))
            .collect();
        FunctionFamily { members, demo: false }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn is_certified(&self) -> bool {
        !self.demo && self.members.iter().all(TestFunction::is_certified)
    }

    /// `sum_i c_i g_i(n)`.
    pub fn combination_at(&self, c: &[ComplexRational], n: i64) -> Result<ComplexRational> {
        let mut acc = ComplexRational::zero();
        for (ci, g) in c.iter().zip(&self.members) {
            if !ci.is_zero() {
                acc += &(ci * g.eval(n)?);
            }
        }
        Ok(acc)
    }
}

/// Entry `(i, n)` is `<g_i, T_f^n mu>` for `n = 0..=stage`.
pub fn orbit_matrix(mu: &FiniteMeasure, family: &FunctionFamily, stage: u64) -> Result<Matrix> {
    let stage = stage as i64;
    family
        .members
        .iter()
        .map(|g| (0..=stage).map(|n| pair(g, &pushforward(mu, n))).collect())
        .collect()
}

/// Coefficient vectors `c` with `sum_i c_i M[i][n] = 0` for every column,
/// modulo the coordinates of constant members.
pub fn annihilator_basis(m: &Matrix, family: &FunctionFamily) -> Vec<Vec<ComplexRational>> {
    let rows = family.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m.first().map_or(0, Vec::len);
    let left = nullspace(&transpose(m, cols), rows);
    let reduced: Vec<Vec<ComplexRational>> = left
        .into_iter()
        .map(|mut c| {
            for (ci, g) in c.iter_mut().zip(&family.members) {
                if g.is_constant() {
                    *ci = ComplexRational::zero();
                }
            }
            c
        })
        .filter(|c| !c.iter().all(ComplexRational::is_zero))
        .collect();
    independent_subset(&reduced, rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    /// `h` tabulated on `[lo, hi + 1]`.
    pub h: TestFunction,
    pub z: ComplexRational,
    /// Number of factors `(T' - z_i)` applied to reach `h`.
    pub steps: usize,
    /// Point `a` used for the forced form `h(n) = z^(n - a) h(a)`; 0 when the
    /// window contains it.
    pub anchor: i64,
}

fn table_values(g: &TestFunction, lo: i64, hi: i64) -> Result<Vec<ComplexRational>> {
    (lo..=hi).map(|n| g.eval(n)).collect()
}

/// Walks `g_(k+1) = (T' - z_(k+1)) g_k` until some `g_(k+1)` vanishes on
/// `[lo, hi]`, then returns `h = g_k` on `[lo, hi + 1]` with `z = z_(k+1)`.
pub fn eigen_extract(g: &TestFunction, roots: &[ComplexRational], window: (i64, i64)) -> Result<EigenPair> {
    let (lo, hi) = window;
    if lo > hi {
        return Err(Error::Precondition(format!("empty window [{lo}, {hi}]")));
    }
    let width = (hi - lo + 1) as usize;
    // g_k stored on [lo, hi + L - k]
    let mut cur = table_values(g, lo, hi + roots.len() as i64)?;
    if cur[..width].iter().all(ComplexRational::is_zero) {
        return Err(Error::Precondition("function vanishes on the window".into()));
    }
    for (k, z) in roots.iter().enumerate() {
        let next: Vec<ComplexRational> = cur.windows(2).map(|w| &w[1] - z * &w[0]).collect();
        if next[..width].iter().all(ComplexRational::is_zero) {
            let values: Vec<ComplexRational> = cur[..=width].to_vec();
            let anchor = if (lo..=hi + 1).contains(&0) { 0 } else { lo };
            let h0 = &values[(anchor - lo) as usize];
            for (i, v) in values.iter().enumerate() {
                let n = lo + i as i64;
                if *v != h0 * z.pow(n - anchor)? {
                    return Err(Error::NotEigenChain {
                        residual: next[..width].to_vec(),
                    });
                }
            }
            let h = TestFunction::table(values.into_iter().enumerate().map(|(i, v)| (lo + i as i64, v)));
            return Ok(EigenPair {
                h,
                z: z.clone(),
                steps: k,
                anchor,
            });
        }
        cur = next;
    }
    Err(Error::NotEigenChain {
        residual: cur[..width].to_vec(),
    })
}

fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (q.numer(), q.denom());
    let (rn, rd): (BigInt, BigInt) = (n.sqrt(), d.sqrt());
    (&rn * &rn == *n && &rd * &rd == *d).then(|| Rational::new(rn, rd))
}

/// Square root inside the Gaussian rationals, when one exists.
pub fn gaussian_sqrt(c: &ComplexRational) -> Option<ComplexRational> {
    let m = rational_sqrt(&c.abs2())?;
    let two = rat(2, 1);
    let a = rational_sqrt(&((&m + &c.re) / &two))?;
    let mut b = rational_sqrt(&((&m - &c.re) / &two))?;
    if c.im.is_negative() {
        b = -b;
    }
    let r = ComplexRational::new(a, b);
    (&r * &r == *c).then_some(r)
}

/// Splits `p = t^s q` with `q(0) != 0`.
pub fn strip_zero_roots(p: &Polynomial) -> (usize, Polynomial) {
    let s = p.coeffs().iter().take_while(|c| c.is_zero()).count();
    (s, Polynomial::new(p.coeffs()[s..].to_vec()))
}

/// Exact roots of a polynomial of degree at most 2, with multiplicity.
pub fn exact_roots(p: &Polynomial) -> Option<Vec<ComplexRational>> {
    let c = p.coeffs();
    match p.degree()? {
        0 => Some(Vec::new()),
        1 => Some(vec![(-&c[0]).checked_div(&c[1]).ok()?]),
        2 => {
            let disc = &c[1] * &c[1] - ComplexRational::from_int(4) * &c[2] * &c[0];
            let s = gaussian_sqrt(&disc)?;
            let den = ComplexRational::from_int(2) * &c[2];
            let r1 = (-&c[1] + &s).checked_div(&den).ok()?;
            let r2 = (-&c[1] - &s).checked_div(&den).ok()?;
            Some(vec![r1, r2])
        }
        _ => None,
    }
}

/// `lead * prod (t - z_i)`.
pub fn poly_from_roots(lead: &ComplexRational, roots: &[ComplexRational]) -> Polynomial {
    let mut c = vec![lead.clone()];
    for z in roots {
        let mut next = vec![ComplexRational::zero(); c.len() + 1];
        for (i, ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= &(ci * z);
        }
        c = next;
    }
    Polynomial::new(c)
}

/// Character carried by a non-zero eigenvalue, when it has a witness route.
pub fn classify_eigenvalue(z: &ComplexRational) -> std::result::Result<Character, String> {
    if z.is_one() {
        return Err("eigenvalue 1: the chain ends at a function constant on the window".into());
    }
    if !z.abs2().is_one() {
        return Character::off_circle(z.clone()).map_err(|e| e.to_string());
    }
    let i = ComplexRational::i();
    let (q, r) = if *z == -ComplexRational::one() {
        (2, 1)
    } else if *z == i {
        (4, 1)
    } else if *z == -i {
        (4, -1)
    } else {
        return Err(format!(
            "unit eigenvalue {z} is not a root of unity and has no exact rotation number"
        ));
    };
    Character::root_of_unity(q, r).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Refuted { witness: Box<WitnessReport> },
    Unresolved { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub coefficients: Vec<ComplexRational>,
    pub eigen: Option<EigenPair>,
    pub outcome: Outcome,
}

impl Candidate {
    pub fn is_refuted(&self) -> bool {
        matches!(self.outcome, Outcome::Refuted { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CyclicityInputs {
    pub mu: FiniteMeasure,
    pub family: FunctionFamily,
    pub plan: StagePlan,
    pub stage: u64,
    /// Caller-supplied roots of the zero-stripped decomposition polynomial.
    pub roots: Option<Vec<ComplexRational>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub inputs: CyclicityInputs,
    pub l: u64,
    pub p: Polynomial,
    /// Multiplicity of the root 0 removed from `p`.
    pub zero_roots: usize,
    pub roots: Option<Vec<ComplexRational>>,
    pub eigen_window: (i64, i64),
    pub matrix: Matrix,
    pub basis: Vec<Vec<ComplexRational>>,
    pub candidates: Vec<Candidate>,
    pub certified: bool,
    pub verdict: String,
    pub disclaimer: String,
}

impl ObstructionReport {
    pub fn no_obstruction(&self) -> bool {
        self.basis.is_empty() || self.candidates.iter().all(Candidate::is_refuted)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}

const WITNESS_EPS: (i64, i64) = (1, 2);
const WITNESS_DELTA: (i64, i64) = (1, 2);

fn resolve_candidate(
    inputs: &CyclicityInputs,
    c: Vec<ComplexRational>,
    roots: Option<&[ComplexRational]>,
    window: (i64, i64),
) -> Result<Candidate> {
    let unresolved = |reason: String, eigen| Candidate {
        coefficients: c.clone(),
        eigen,
        outcome: Outcome::Unresolved { reason },
    };
    let Some(roots) = roots else {
        return Ok(unresolved("unresolved: root extraction".into(), None));
    };
    let (lo, hi) = window;
    let top = hi + roots.len() as i64 + 1;
    let g = TestFunction::Table(
        (lo..=top)
            .map(|n| Ok((n, inputs.family.combination_at(&c, n)?)))
            .collect::<Result<_>>()?,
    );
    let eigen = match eigen_extract(&g, roots, window) {
        Ok(e) => e,
        Err(Error::NotEigenChain { .. }) => return Ok(unresolved("not an eigen-chain on the window".into(), None)),
        Err(Error::Precondition(reason)) => return Ok(unresolved(reason, None)),
        Err(e) => return Err(e),
    };
    let ch = match classify_eigenvalue(&eigen.z) {
        Ok(ch) => ch,
        Err(reason) => return Ok(unresolved(reason, Some(eigen))),
    };
    let witness = discontinuity_witness(
        &inputs.plan,
        &ch,
        vec![SparseVector::unit(0)],
        rat(WITNESS_EPS.0, WITNESS_EPS.1),
        rat(WITNESS_DELTA.0, WITNESS_DELTA.1),
    );
    Ok(match witness {
        Ok((_, w)) if w.verdict => Candidate {
            coefficients: c.clone(),
            eigen: Some(eigen),
            outcome: Outcome::Refuted { witness: Box::new(w) },
        },
        Ok(_) => unresolved("witness certificates did not validate".into(), Some(eigen)),
        Err(e) => unresolved(format!("witness failed: {e}"), Some(eigen)),
    })
}

/// Runs decomposition, orbit matrix, annihilator search, eigen reduction and
/// character refutation for `mu` at stage `inputs.stage`.
pub fn run_cyclicity(inputs: CyclicityInputs) -> Result<ObstructionReport> {
    if inputs.mu.is_zero() || !in_zero_mass_hyperplane(&inputs.mu) {
        return Err(Error::Precondition(
            "mu must be a non-zero measure of total mass zero".into(),
        ));
    }
    if inputs.family.is_empty() {
        return Err(Error::Precondition("the function family is empty".into()));
    }
    let (l, p) = decompose(&inputs.mu)?;
    let (s, q) = strip_zero_roots(&p);
    let roots = match &inputs.roots {
        Some(given) => {
            let lead = q.coeffs().last().expect("non-zero polynomial").clone();
            if poly_from_roots(&lead, given) != q {
                return Err(Error::InvalidInput(
                    "supplied roots do not factor the decomposition polynomial".into(),
                ));
            }
            Some(given.clone())
        }
        None => exact_roots(&q),
    };
    // roots equal to 1 go first so the chain ends on a non-trivial eigenvalue when it can
    let roots = roots.map(|mut r| {
        r.sort_by_key(|z| !z.is_one());
        r
    });
    let (s, l_i, n_i) = (s as i64, l as i64, inputs.stage as i64);
    let eigen_window = (s - l_i, n_i - l_i + s);

    let matrix = orbit_matrix(&inputs.mu, &inputs.family, inputs.stage)?;
    let basis = annihilator_basis(&matrix, &inputs.family);
    let candidates = basis
        .iter()
        .map(|c| resolve_candidate(&inputs, c.clone(), roots.as_deref(), eigen_window))
        .collect::<Result<Vec<_>>>()?;
    let clear = basis.is_empty() || candidates.iter().all(Candidate::is_refuted);
    let verdict = if clear {
        format!("no obstruction found at stage {}", inputs.stage)
    } else {
        format!("unresolved obstruction candidates at stage {}", inputs.stage)
    };
    Ok(ObstructionReport {
        certified: inputs.family.is_certified(),
        inputs,
        l,
        p,
        zero_roots: s as usize,
        roots,
        eigen_window,
        matrix,
        basis,
        candidates,
        verdict,
        disclaimer: DISCLAIMER.to_string(),
    })
}

pub fn cyclicity_report(
    mu: &FiniteMeasure,
    family: &FunctionFamily,
    plan: &StagePlan,
    stage: u64,
) -> Result<ObstructionReport> {
    run_cyclicity(CyclicityInputs {
        mu: mu.clone(),
        family: family.clone(),
        plan: plan.clone(),
        stage,
        roots: None,
    })
}

/// Re-runs the inputs embedded in a serialized report and compares bytes.
pub fn replay_report(json: &str) -> Result<bool> {
    let report: ObstructionReport =
        serde_json::from_str(json).map_err(|e| Error::InvalidInput(format!("report does not parse: {e}")))?;
    let again = run_cyclicity(report.inputs)?;
    Ok(again.to_json() == json)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builder::build;
    use crate::builder::Goal;
    use crate::measure::dual_shift;
    use crate::weak::base_prefix;

    fn d(n: i64) -> FiniteMeasure {
        FiniteMeasure::unit(n)
    }

    fn c(n: i64) -> ComplexRational {
        ComplexRational::from_int(n)
    }

    fn ramp() -> TestFunction {
        TestFunction::tabulate(-100, 100, c)
    }

    #[test]
    fn constant_row_is_zero() {
        let mu = d(1).difference(&d(0));
        let fam = FunctionFamily::certified(vec![TestFunction::Constant(c(1))]).unwrap();
        let m = orbit_matrix(&mu, &fam, 5).unwrap();
        assert!(m[0].iter().all(ComplexRational::is_zero));
    }

    #[test]
    fn ramp_row_is_all_ones() {
        let mu = d(1).difference(&d(0));
        let m = orbit_matrix(&mu, &FunctionFamily::demo(vec![ramp()]), 5).unwrap();
        assert!(m[0].iter().all(ComplexRational::is_one));
    }

    #[test]
    fn pullback_row_of_unit_vector() {
        let fam = FunctionFamily::demo(vec![TestFunction::pullback(
            SparseVector::unit(0),
            SparseVector::unit(0),
        )]);
        let m = orbit_matrix(&d(0), &fam, 4).unwrap();
        assert_eq!(m[0], vec![c(1), c(0), c(0), c(0), c(0)]);
    }

    #[test]
    fn table_outside_domain_errors() {
        let fam = FunctionFamily::demo(vec![TestFunction::tabulate(0, 2, c)]);
        assert_eq!(orbit_matrix(&d(0), &fam, 5), Err(Error::NotEvaluable { point: 3 }));
    }

    #[test]
    fn certified_family_rejects_tables() {
        assert!(FunctionFamily::certified(vec![ramp()]).is_err());
    }

    #[test]
    fn zero_matrix_gives_full_basis() {
        let fam = FunctionFamily::demo(vec![ramp(), ramp(), ramp()]);
        let m = vec![vec![c(0); 4]; 3];
        assert_eq!(annihilator_basis(&m, &fam).len(), 3);
    }

    #[test]
    fn independent_rows_give_empty_basis() {
        let fam = FunctionFamily::demo(vec![ramp(), ramp()]);
        let m = vec![vec![c(1), c(0), c(2)], vec![c(0), c(1), c(3)]];
        assert!(annihilator_basis(&m, &fam).is_empty());
    }

    #[test]
    fn constants_are_quotiented() {
        let mu = d(1).difference(&d(0));
        let fam = FunctionFamily::demo(vec![TestFunction::Constant(c(1)), ramp()]);
        let m = orbit_matrix(&mu, &fam, 6).unwrap();
        assert!(annihilator_basis(&m, &fam).is_empty());
    }

    #[test]
    fn rows_are_shift_equivariant() {
        let plan = build(base_prefix(6).into_iter().map(|spec| Goal::Hit { spec })).unwrap();
        let mu = d(2).difference(&d(-1));
        let g = FunctionFamily::pullbacks(&plan, &[SparseVector::unit(1)])
            .members
            .remove(0);
        let shifted = FunctionFamily::certified(vec![dual_shift(&g, 1).unwrap()]).unwrap();
        let base = FunctionFamily::certified(vec![g]).unwrap();
        let a = orbit_matrix(&mu, &shifted, 20).unwrap();
        let b = orbit_matrix(&mu, &base, 21).unwrap();
        assert_eq!(a[0][..], b[0][1..]);
    }

    #[test]
    fn eigen_already() {
        let e = eigen_extract(&TestFunction::character(c(2)), &[c(2)], (-5, 5)).unwrap();
        assert_eq!((e.z.clone(), e.steps), (c(2), 0));
        assert_eq!(e.h.eval(3).unwrap(), c(8));
    }

    #[test]
    fn eigen_ramp_two_steps() {
        let e = eigen_extract(&ramp(), &[c(1), c(1)], (-5, 5)).unwrap();
        assert_eq!((e.z.clone(), e.steps), (c(1), 1));
        assert!((-5..=6).all(|n| e.h.eval(n).unwrap().is_one()));
    }

    #[test]
    fn eigen_sum_of_characters() {
        let g = TestFunction::tabulate(-10, 10, |n| c(2).pow(n).unwrap() + c(3).pow(n).unwrap());
        let e = eigen_extract(&g, &[c(2), c(3)], (-5, 5)).unwrap();
        assert_eq!(e.z, c(3));
        assert!((-5..=6).all(|n| e.h.eval(n).unwrap() == c(3).pow(n).unwrap()));
    }

    #[test]
    fn not_an_eigen_chain() {
        let g = TestFunction::tabulate(-10, 10, |n| c(n * n));
        assert!(
            matches!(eigen_extract(&g, &[c(1)], (-3, 3)), Err(Error::NotEigenChain { residual }) if residual.len() == 7)
        );
    }

    #[test]
    fn quadratic_roots() {
        assert_eq!(exact_roots(&Polynomial::from_ints(&[2, -3, 1])), Some(vec![c(2), c(1)]));
        // t^2 + 1
        let r = exact_roots(&Polynomial::from_ints(&[1, 0, 1])).unwrap();
        assert_eq!(r, vec![ComplexRational::i(), -ComplexRational::i()]);
        assert_eq!(exact_roots(&Polynomial::from_ints(&[-2, 0, 1])), None);
        assert_eq!(
            gaussian_sqrt(&ComplexRational::new(rat(0, 1), rat(2, 1))),
            Some(c(1) + ComplexRational::i())
        );
    }

    #[test]
    fn zero_measure_is_rejected() {
        let fam = FunctionFamily::demo(vec![ramp()]);
        assert!(matches!(
            cyclicity_report(&FiniteMeasure::zero(), &fam, &StagePlan::new(), 4),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            cyclicity_report(&d(0), &fam, &StagePlan::new(), 4),
            Err(Error::Precondition(_))
        ));
        assert!(matches!(
            cyclicity_report(
                &d(1).difference(&d(0)),
                &FunctionFamily::demo(vec![]),
                &StagePlan::new(),
                4
            ),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn demo_character_is_refuted() {
        // (t - 1)(t - 2) applied to delta_{-1}
        let mu = FiniteMeasure::from_terms([(-1, c(2)), (0, c(-3)), (1, c(1))]);
        let fam = FunctionFamily::demo(vec![TestFunction::character(c(2))]);
        let rep = cyclicity_report(&mu, &fam, &StagePlan::new(), 16).unwrap();
        assert_eq!(rep.basis.len(), 1);
        let cand = &rep.candidates[0];
        assert_eq!(cand.eigen.as_ref().unwrap().z, c(2));
        assert!(cand.is_refuted());
        assert_eq!(rep.verdict, "no obstruction found at stage 16");
        assert!(!rep.certified);
        assert!(replay_report(&rep.to_json()).unwrap());
    }

    #[test]
    fn pullback_family_has_no_annihilator() {
        let plan = build(base_prefix(16).into_iter().map(|spec| Goal::Hit { spec })).unwrap();
        let tests: Vec<SparseVector> = (-2..=2).map(SparseVector::unit).collect();
        let fam = FunctionFamily::pullbacks(&plan, &tests);
        let rep = cyclicity_report(&d(1).difference(&d(0)), &fam, &plan, 32).unwrap();
        assert!(rep.basis.is_empty());
        assert!(rep.certified);
        assert_eq!(rep.verdict, "no obstruction found at stage 32");
        let mut tampered = rep.to_json();
        tampered = tampered.replacen("\"stage\": 32", "\"stage\": 31", 1);
        assert!(!replay_report(&tampered).unwrap());
    }
}
