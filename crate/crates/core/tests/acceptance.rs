//! Acceptance battery: one check per criterion, each with its time budget.
//! Every criterion prints a PASS/FAIL line on stdout, bypassing capture.

use std::io::Write;
use std::time::{Duration, Instant};

use lcs_workbench::builder::{build, certify, plan_extend, realize, Goal, StagePlan};
use lcs_workbench::character::{certify_constraint, CharConstraint, Character, ConstraintEvidence};
use lcs_workbench::exact::{int, rat, ComplexRational, Rational};
use lcs_workbench::measure::{apply_poly, decompose, dual_shift, pair, pushforward, FiniteMeasure, TestFunction};
use lcs_workbench::probe::{eigen_extract, replay_report, run_cyclicity, CyclicityInputs, FunctionFamily};
use lcs_workbench::report::{certificates_json, cyclicity_tests};
use lcs_workbench::sample;
use lcs_workbench::shift::{shift_apply, SparseVector};
use lcs_workbench::weak::{base_prefix, in_neighborhood};
use lcs_workbench::witness::{discontinuity_witness, replay_witness, residue_cover};

const SEED: u64 = 0x5eed_2024;

fn report(index: u32, name: &str, ok: bool, elapsed: Duration, budget: Duration) -> bool {
    let within = elapsed < budget;
    let verdict = if ok && within { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "criterion {index}: {verdict} {name} ({} ms, budget {} ms)",
        elapsed.as_millis(),
        budget.as_millis()
    )
    .unwrap();
    ok && within
}

fn timed(index: u32, name: &str, budget_ms: u64, f: impl FnOnce() -> bool) -> bool {
    let start = Instant::now();
    let ok = f();
    report(index, name, ok, start.elapsed(), Duration::from_millis(budget_ms))
}

fn weight(n: i64) -> i64 {
    if n > 0 {
        2
    } else {
        1
    }
}

/// One step of the shift, straight from `T e_n = w(n) e_(n-1)`.
fn step(u: &SparseVector) -> SparseVector {
    SparseVector::from_terms(u.iter().map(|(n, c)| (n - 1, c * ComplexRational::from_int(weight(n)))))
}

fn step_back(u: &SparseVector) -> SparseVector {
    SparseVector::from_terms(u.iter().map(|(n, c)| (n + 1, c.scale(&rat(1, weight(n + 1))))))
}

fn norm2(u: &SparseVector) -> Rational {
    u.iter().fold(int(0), |acc, (_, c)| acc + c.abs2())
}

fn inner(u: &SparseVector, v: &SparseVector) -> ComplexRational {
    u.iter()
        .fold(ComplexRational::zero(), |acc, (n, c)| acc + c * v.get(n).conj())
}

fn base_goals(n: usize) -> Vec<Goal> {
    base_prefix(n).into_iter().map(|spec| Goal::Hit { spec }).collect()
}

fn criterion_1() -> bool {
    timed(1, "energy identity and invertibility", 1_000, || {
        let mut rng = sample::rng(SEED);
        (0..200).all(|_| {
            let u = sample::vector(&mut rng, 16, 8);
            let tu = step(&u);
            let positive = u
                .iter()
                .filter(|(n, _)| *n > 0)
                .fold(int(0), |acc, (_, c)| acc + c.abs2());
            shift_apply(&u, 1) == tu
                && norm2(&tu) - norm2(&u) == int(3) * positive
                && step(&step_back(&u)) == u
                && shift_apply(&shift_apply(&u, -1), 1) == u
        })
    })
}

fn criterion_2() -> bool {
    timed(2, "adjointness of pushforward and dual shift", 1_000, || {
        let mut rng = sample::rng(SEED + 1);
        (0..200).all(|_| {
            let g = sample::test_function(&mut rng, 6);
            let mu = sample::measure(&mut rng, 5, 6);
            let lhs = pair(&g, &pushforward(&mu, 1)).unwrap();
            let direct = mu
                .iter()
                .fold(ComplexRational::zero(), |acc, (n, c)| acc + c * g.eval(n + 1).unwrap());
            lhs == pair(&dual_shift(&g, 1).unwrap(), &mu).unwrap() && lhs == direct
        })
    })
}

fn criterion_3() -> bool {
    timed(3, "decompose round trip", 2_000, || {
        let mut rng = sample::rng(SEED + 2);
        (0..500).all(|_| {
            let mu: FiniteMeasure = sample::nonzero_sparse(&mut rng, -4, 4, 6, 8);
            let (l, p) = decompose(&mu).unwrap();
            let bound = mu.indices().map(i64::abs).max().unwrap() as u64;
            let rebuilt = FiniteMeasure::from_terms(
                p.coeffs()
                    .iter()
                    .enumerate()
                    .map(|(j, c)| (j as i64 - l as i64, c.clone())),
            );
            l == bound && apply_poly(&p, &FiniteMeasure::unit(-(l as i64))) == mu && rebuilt == mu
        })
    })
}

/// Gap of block `i` recomputed from stepwise powers of the shift.
fn oracle_gaps_zero(plan: &StagePlan, x: &SparseVector) -> bool {
    let mut orbit = x.clone();
    let mut t = 0;
    plan.blocks.iter().all(|b| {
        while t < b.hit_time {
            orbit = step(&orbit);
            t += 1;
        }
        let Goal::Hit { spec } = &b.goal else { return false };
        in_neighborhood(&orbit, spec)
            && spec
                .tests
                .iter()
                .all(|w| inner(&orbit.difference(&spec.center), w).is_zero())
    })
}

fn criterion_4() -> (bool, StagePlan, StagePlan) {
    let mut plans = None;
    let ok = timed(4, "builder exactness and stability", 10_000, || {
        let base = build(base_goals(32)).unwrap();
        let extended = base_prefix(48).into_iter().skip(32).fold(base.clone(), |plan, spec| {
            plan_extend(&plan, Goal::Hit { spec }).unwrap()
        });
        let (base, extended) = plans.insert((base, extended));
        let first = certify(base).unwrap();
        let later = certify(extended).unwrap();
        let exact = first.len() == 32 && first.iter().all(|c| c.valid && c.all_gaps_zero());
        let stable = later.len() == 48 && certificates_json(&first) == certificates_json(&later[..32]);
        exact && stable && oracle_gaps_zero(extended, &realize(extended))
    });
    let (base, extended) = plans.expect("plans built");
    (ok, base, extended)
}

fn criterion_5(base: &StagePlan) -> bool {
    timed(5, "Z+ density certificates", 5_000, || {
        let tests: Vec<SparseVector> = (-2..=2).map(SparseVector::unit).collect();
        let mut plan = base.clone();
        (-5..=-1).all(|m| {
            plan = plan_extend(
                &plan,
                Goal::ZPlusDensity {
                    m,
                    tests: tests.clone(),
                    eps: rat(1, 8),
                },
            )
            .unwrap();
            let cert = certify(&plan).unwrap().pop().unwrap();
            let x = realize(&plan);
            let gap_zero = tests
                .iter()
                .all(|w| inner(&shift_apply(&x, cert.hit_time).difference(&shift_apply(&x, m)), w).is_zero());
            cert.valid && cert.hit_time > 0 && cert.reference_time == Some(m) && cert.all_gaps_zero() && gap_zero
        })
    })
}

fn criterion_6(extended: &StagePlan) -> bool {
    timed(6, "strict norm growth", 5_000, || {
        let x = realize(extended);
        let hi = extended.last_hit_time().unwrap() - extended.window_radius - 1;
        let mut cur = shift_apply(&x, -10);
        (-10..=hi).all(|_| {
            let next = step(&cur);
            let grows = norm2(&next) > norm2(&cur);
            cur = next;
            grows
        })
    })
}

fn criterion_7() -> bool {
    timed(7, "character witnesses", 10_000, || {
        let tests = vec![SparseVector::unit(0)];
        let two = Character::off_circle(ComplexRational::from_int(2)).unwrap();
        let (pa, a) = discontinuity_witness(&StagePlan::new(), &two, tests.clone(), rat(1, 2), int(1)).unwrap();
        let z = ComplexRational::from_int(2);
        let sep = (z.pow(a.times.0).unwrap() - z.pow(a.times.1).unwrap()).abs2();
        let a_ok = a.verdict
            && sep >= int(1)
            && a.certificates.len() == 2
            && a.certificates.iter().all(|c| c.valid)
            && a.certificates[0].goal == a.certificates[1].goal
            && replay_witness(&pa, &a).unwrap();

        let i = Character::root_of_unity(4, 1).unwrap();
        let spec = base_prefix(6).pop().unwrap();
        let (pb, times) = residue_cover(&StagePlan::new(), &i, &spec).unwrap();
        let ii = ComplexRational::i();
        let values: Vec<ComplexRational> = times.iter().map(|&n| ii.pow(n).unwrap()).collect();
        let all_residues = [ComplexRational::one(), ii.clone(), -ComplexRational::one(), -ii.clone()]
            .iter()
            .all(|v| values.contains(v));
        let b_ok = times.len() == 4 && all_residues && certify(&pb).unwrap().iter().all(|c| c.valid);

        let golden = Character::golden(12);
        let (pc, c) = discontinuity_witness(&StagePlan::new(), &golden, tests, rat(1, 2), rat(7, 5)).unwrap();
        let arcs = [
            CharConstraint::arc(int(0), rat(1, 4)).unwrap(),
            CharConstraint::arc(rat(1, 2), rat(3, 4)).unwrap(),
        ];
        let hit_arcs = [c.times.1, c.times.0].iter().zip(&arcs).all(|(&n, arc)| {
            matches!(
                certify_constraint(&golden, arc, n).unwrap(),
                Some(ConstraintEvidence::ArcInterval { .. })
            )
        });
        let c_ok = c.verdict && hit_arcs && c.times.0 <= 10_000 && replay_witness(&pc, &c).unwrap();
        a_ok && b_ok && c_ok
    })
}

fn criterion_8(base: &StagePlan) -> bool {
    timed(8, "cyclicity report at stage 64", 30_000, || {
        let family = FunctionFamily::pullbacks(base, &cyclicity_tests());
        let mu = FiniteMeasure::unit(1).difference(&FiniteMeasure::unit(0));
        let rep = run_cyclicity(CyclicityInputs {
            mu,
            family,
            plan: base.clone(),
            stage: 64,
            roots: None,
        })
        .unwrap();
        let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("cyclicity-64.json");
        std::fs::write(&path, rep.to_json()).unwrap();
        let replays = replay_report(&std::fs::read_to_string(&path).unwrap()).unwrap();
        rep.basis.is_empty()
            && rep.matrix.len() == 9
            && rep.matrix.iter().all(|row| row.len() == 65)
            && rep.verdict == "no obstruction found at stage 64"
            && rep.certified
            && replays
    })
}

fn criterion_9() -> bool {
    timed(9, "eigen chain", 1_000, || {
        let c = ComplexRational::from_int;
        let cases = [
            (TestFunction::character(c(2)), vec![c(2)], c(2), 0),
            (TestFunction::tabulate(-25, 25, c), vec![c(1), c(1)], c(1), 1),
            (
                TestFunction::tabulate(-25, 25, |n| c(2).pow(n).unwrap() + c(3).pow(n).unwrap()),
                vec![c(2), c(3)],
                c(3),
                1,
            ),
        ];
        cases.into_iter().all(|(g, roots, z, steps)| {
            let e = eigen_extract(&g, &roots, (-20, 20)).unwrap();
            let h0 = e.h.eval(0).unwrap();
            e.z == z && e.steps == steps && (-20..=20).all(|n| e.h.eval(n).unwrap() == &h0 * z.pow(n).unwrap())
        })
    })
}

#[test]
fn acceptance() {
    let (c1, c2, c3) = (criterion_1(), criterion_2(), criterion_3());
    let (c4, base, extended) = criterion_4();
    let results = [
        c1,
        c2,
        c3,
        c4,
        criterion_5(&base),
        criterion_6(&extended),
        criterion_7(),
        criterion_8(&base),
        criterion_9(),
    ];
    let failed: Vec<usize> = results
        .iter()
        .enumerate()
        .filter(|(_, ok)| !**ok)
        .map(|(i, _)| i + 1)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
