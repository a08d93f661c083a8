//! Versioned report envelope, goal files and the acceptance suite.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::builder::{build, certify, plan_extend, realize, Goal, HitCertificate, StagePlan, CONSTRUCTION_NOTE};
use crate::character::{CharConstraint, Character};
use crate::error::{Error, Result};
use crate::exact::{cr, int, rat, ComplexRational};
use crate::measure::{apply_poly, decompose, dual_shift, pair, pushforward, FiniteMeasure, TestFunction};
use crate::probe::{eigen_extract, replay_report, run_cyclicity, CyclicityInputs, FunctionFamily};
use crate::sample;
use crate::shift::{norm2, positive_mass2, shift_apply, SparseVector};
use crate::weak::{base_prefix, enumerate_base};
use crate::witness::{discontinuity_witness, replay_witness, residue_cover};

pub const REPORT_VERSION: &str = "1";
pub const DEFAULT_SEED: u64 = 0x5eed_2024;
pub const DEFAULT_STAGE: u64 = 64;

/// Top-level report: deterministic content plus a separate metadata map for
/// anything that varies between runs (timings).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub version: String,
    pub config: Value,
    pub items: Vec<T>,
    pub metadata: BTreeMap<String, Value>,
}

impl<T: Serialize> Envelope<T> {
    pub fn new(config: Value, items: Vec<T>) -> Self {
        Envelope {
            version: REPORT_VERSION.to_string(),
            config,
            items,
            metadata: BTreeMap::new(),
        }
    }

    /// Serialization with the metadata map emptied; identical inputs give
    /// identical bytes.
    pub fn stable_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("envelopes serialize");
        v["metadata"] = json!({});
        serde_json::to_string_pretty(&v).expect("values serialize")
    }

    pub fn full_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("envelopes serialize")
    }
}

/// Canonical bytes of a certificate list.
pub fn certificates_json(certs: &[HitCertificate]) -> String {
    serde_json::to_string_pretty(certs).expect("certificates serialize")
}

/// Parses a goal file: a JSON array whose entries are goals or the shorthand
/// `{"kind": "base", "index": i}` for the `i`-th enumerated base spec.
pub fn parse_goals(text: &str) -> Result<Vec<Goal>> {
    let entries: Vec<Value> = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("goal file: {e}")))?;
    entries
        .into_iter()
        .enumerate()
        .map(|(i, entry)| {
            let goal = if entry.get("kind").and_then(Value::as_str) == Some("base") {
                let index = entry
                    .get("index")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| Error::InvalidInput(format!("goal {i}: base entry needs a non-negative index")))?;
                Goal::Hit {
                    spec: enumerate_base(index),
                }
            } else {
                serde_json::from_value(entry).map_err(|e| Error::InvalidInput(format!("goal {i}: {e}")))?
            };
            goal.validate()
                .map_err(|e| Error::InvalidInput(format!("goal {i}: {e}")))?;
            Ok(goal)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemReport {
    pub index: u32,
    pub name: String,
    pub status: Status,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub stage: u64,
    pub seed: u64,
    /// Base specs in the reference build.
    pub base_count: usize,
    /// Further specs appended for the stability check.
    pub extension: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            stage: DEFAULT_STAGE,
            seed: DEFAULT_SEED,
            base_count: 32,
            extension: 16,
        }
    }
}

/// Item names and their time budgets in milliseconds.
pub const ITEMS: [(u32, &str, u64); 10] = [
    (1, "energy identity", 1_000),
    (2, "adjointness", 1_000),
    (3, "decompose round trip", 2_000),
    (4, "builder exactness and stability", 10_000),
    (5, "Z+ density certificates", 5_000),
    (6, "norm growth", 5_000),
    (7, "character witnesses", 10_000),
    (8, "cyclicity report", 30_000),
    (9, "eigen chain", 1_000),
    (10, "certificate replay", 10_000),
];

/// Certificate bytes to replay against a plan instead of the suite's own.
#[derive(Debug, Clone, Default)]
pub struct ReplayInput {
    pub plan: Option<StagePlan>,
    pub certificates: Option<String>,
}

/// Shared state of one suite run.
pub struct Suite {
    pub config: SuiteConfig,
    pub replay: ReplayInput,
    base_plan: Option<Result<StagePlan>>,
    extended_plan: Option<Result<StagePlan>>,
}

fn outcome(ok: bool, detail: Value) -> (Status, Value) {
    (if ok { Status::Pass } else { Status::Fail }, detail)
}

impl Suite {
    pub fn new(config: SuiteConfig) -> Self {
        Suite {
            config,
            replay: ReplayInput::default(),
            base_plan: None,
            extended_plan: None,
        }
    }

    pub fn with_replay(mut self, replay: ReplayInput) -> Self {
        self.replay = replay;
        self
    }

    pub fn base_plan(&mut self) -> Result<StagePlan> {
        let n = self.config.base_count;
        self.base_plan
            .get_or_insert_with(|| build(base_prefix(n).into_iter().map(|spec| Goal::Hit { spec })))
            .clone()
    }

    pub fn extended_plan(&mut self) -> Result<StagePlan> {
        if self.extended_plan.is_none() {
            let (n, k) = (self.config.base_count, self.config.extension);
            let extra = base_prefix(n + k).into_iter().skip(n);
            let ext = self.base_plan().and_then(|p| {
                extra
                    .into_iter()
                    .try_fold(p, |plan, spec| plan_extend(&plan, Goal::Hit { spec }))
            });
            self.extended_plan = Some(ext);
        }
        self.extended_plan.clone().expect("just set")
    }

    /// Runs one item; errors become failures with the message as detail.
    pub fn run_item(&mut self, index: u32) -> ItemReport {
        let name = ITEMS
            .iter()
            .find(|i| i.0 == index)
            .map_or("unknown", |i| i.1)
            .to_string();
        let result = match index {
            1 => self.energy(),
            2 => self.adjointness(),
            3 => self.decompose_round_trip(),
            4 => self.builder_stability(),
            5 => self.density(),
            6 => self.norm_growth(),
            7 => self.character_witnesses(),
            8 => self.cyclicity(),
            9 => self.eigen_chain(),
            10 => self.certificate_replay(),
            _ => Err(Error::InvalidInput(format!("no suite item {index}"))),
        };
        let (status, detail) = result.unwrap_or_else(|e| (Status::Fail, json!({ "error": e.to_string() })));
        ItemReport {
            index,
            name,
            status,
            detail,
        }
    }

    /// Runs every item in order; timings go to the metadata map.
    pub fn run(mut self) -> Envelope<ItemReport> {
        let mut items = Vec::new();
        let mut timings = BTreeMap::new();
        for (index, _, budget) in ITEMS {
            let start = Instant::now();
            let item = self.run_item(index);
            let ms = start.elapsed().as_millis() as u64;
            timings.insert(format!("{index:02}"), json!({ "elapsed_ms": ms, "budget_ms": budget }));
            items.push(item);
        }
        let config = serde_json::to_value(&self.config).expect("config serializes");
        let mut env = Envelope::new(config, items);
        env.metadata.insert("timings".into(), json!(timings));
        env
    }

    fn energy(&mut self) -> Result<(Status, Value)> {
        let mut rng = sample::rng(self.config.seed ^ 1);
        let mut failures = Vec::new();
        for s in 0..200 {
            let u = sample::vector(&mut rng, 16, 8);
            let tu = shift_apply(&u, 1);
            let energy = norm2(&tu) - norm2(&u) == int(3) * positive_mass2(&u);
            let round = shift_apply(&shift_apply(&u, -1), 1) == u && shift_apply(&tu, -1) == u;
            if !(energy && round) {
                failures.push(s);
            }
        }
        Ok(outcome(
            failures.is_empty(),
            json!({ "samples": 200, "failures": failures }),
        ))
    }

    fn adjointness(&mut self) -> Result<(Status, Value)> {
        let mut rng = sample::rng(self.config.seed ^ 2);
        let mut failures = Vec::new();
        for s in 0..200 {
            let g = sample::test_function(&mut rng, 6);
            let mu = sample::measure(&mut rng, 5, 6);
            if pair(&g, &pushforward(&mu, 1))? != pair(&dual_shift(&g, 1)?, &mu)? {
                failures.push(s);
            }
        }
        Ok(outcome(
            failures.is_empty(),
            json!({ "samples": 200, "failures": failures }),
        ))
    }

    fn decompose_round_trip(&mut self) -> Result<(Status, Value)> {
        let mut rng = sample::rng(self.config.seed ^ 3);
        let mut failures = Vec::new();
        for s in 0..500 {
            let mu: FiniteMeasure = sample::nonzero_sparse(&mut rng, -4, 4, 6, 8);
            let (l, p) = decompose(&mu)?;
            let bound = mu.min_index().unwrap().abs().max(mu.max_index().unwrap().abs()) as u64;
            if l != bound || apply_poly(&p, &FiniteMeasure::unit(-(l as i64))) != mu {
                failures.push(s);
            }
        }
        Ok(outcome(
            failures.is_empty(),
            json!({ "samples": 500, "failures": failures }),
        ))
    }

    fn builder_stability(&mut self) -> Result<(Status, Value)> {
        let base = self.base_plan()?;
        let ext = self.extended_plan()?;
        let first = certify(&base)?;
        let later = certify(&ext)?;
        let n = self.config.base_count;
        let exact = first.len() == n && first.iter().all(|c| c.valid && c.all_gaps_zero());
        let stable = later.len() >= n && certificates_json(&first) == certificates_json(&later[..n]);
        let times: Vec<i64> = ext.blocks.iter().map(|b| b.hit_time).collect();
        Ok(outcome(
            exact && stable,
            json!({
                "construction": CONSTRUCTION_NOTE,
                "certificates": first.len(),
                "all_gaps_zero": exact,
                "stable_under_extension": stable,
                "window_radius": ext.window_radius,
                "separation_gap": ext.separation_gap,
                "hit_times": times,
            }),
        ))
    }

    fn density(&mut self) -> Result<(Status, Value)> {
        let tests: Vec<SparseVector> = (-2..=2).map(SparseVector::unit).collect();
        let mut plan = self.base_plan()?;
        let mut rows = Vec::new();
        let mut ok = true;
        for m in -5..=-1 {
            plan = plan_extend(
                &plan,
                Goal::ZPlusDensity {
                    m,
                    tests: tests.clone(),
                    eps: rat(1, 8),
                },
            )?;
            let cert = certify(&plan)?.pop().expect("block appended");
            let good = cert.valid && cert.all_gaps_zero() && cert.hit_time > 0;
            ok &= good;
            rows.push(json!({ "m": m, "hit_time": cert.hit_time, "gaps2": cert.gaps2.iter().map(|g| g.to_string()).collect::<Vec<_>>(), "valid": good }));
        }
        Ok(outcome(ok, json!({ "eps": "1/8", "certificates": rows })))
    }

    fn norm_growth(&mut self) -> Result<(Status, Value)> {
        let plan = self.extended_plan()?;
        let x = realize(&plan);
        let last = plan
            .last_hit_time()
            .ok_or_else(|| Error::Precondition("empty plan".into()))?;
        let hi = last - plan.window_radius - 1;
        let mut violations = Vec::new();
        let mut cur = shift_apply(&x, -10);
        let mut cur_norm = norm2(&cur);
        for n in -10..=hi {
            let next = shift_apply(&cur, 1);
            let next_norm = norm2(&next);
            if next_norm <= cur_norm {
                violations.push(n);
            }
            cur = next;
            cur_norm = next_norm;
        }
        Ok(outcome(
            violations.is_empty(),
            json!({ "range": [-10, hi], "violations": violations }),
        ))
    }

    fn character_witnesses(&mut self) -> Result<(Status, Value)> {
        let tests = vec![SparseVector::unit(0)];
        let two = Character::off_circle(ComplexRational::from_int(2))?;
        let (pa, a) = discontinuity_witness(&StagePlan::new(), &two, tests.clone(), rat(1, 2), int(1))?;
        let a_ok = a.verdict && a.separation2 >= int(1) && replay_witness(&pa, &a)?;

        let i = Character::root_of_unity(4, 1)?;
        let spec = enumerate_base(5);
        let (pb, times) = residue_cover(&StagePlan::new(), &i, &spec)?;
        let certs = certify(&pb)?;
        let residues: Vec<i64> = times.iter().map(|n| n.rem_euclid(4)).collect();
        let b_ok = certs.iter().all(|c| c.valid) && residues == [0, 1, 2, 3];

        let golden = Character::golden(12);
        let (pc, c) = discontinuity_witness(&StagePlan::new(), &golden, tests, rat(1, 2), rat(7, 5))?;
        let arcs = vec![
            CharConstraint::Arc {
                lo: int(0),
                hi: rat(1, 4),
            },
            CharConstraint::Arc {
                lo: rat(1, 2),
                hi: rat(3, 4),
            },
        ];
        let c_ok = c.verdict && c.constraints == arcs && c.times.0 <= 10_000 && replay_witness(&pc, &c)?;

        Ok(outcome(
            a_ok && b_ok && c_ok,
            json!({
                "off_circle": { "pass": a_ok, "times": [a.times.0, a.times.1], "separation2": a.separation2.to_string() },
                "root_of_unity": { "pass": b_ok, "times": times, "residues": residues },
                "golden": { "pass": c_ok, "times": [c.times.0, c.times.1], "separation2": c.separation2.to_string() },
            }),
        ))
    }

    fn cyclicity(&mut self) -> Result<(Status, Value)> {
        if self.config.stage == 0 {
            return Ok((
                Status::Skipped,
                json!({ "reason": "stage 0 has a single orbit column" }),
            ));
        }
        let plan = self.base_plan()?;
        let family = FunctionFamily::pullbacks(&plan, &cyclicity_tests());
        let mu = FiniteMeasure::unit(1).difference(&FiniteMeasure::unit(0));
        let stage = self.config.stage;
        let rep = run_cyclicity(CyclicityInputs {
            mu,
            family,
            plan,
            stage,
            roots: None,
        })?;
        let expected = format!("no obstruction found at stage {stage}");
        let replays = replay_report(&rep.to_json())?;
        let ok = rep.basis.is_empty() && rep.verdict == expected && rep.certified && replays;
        Ok(outcome(
            ok,
            json!({ "stage": stage, "basis_dim": rep.basis.len(), "verdict": rep.verdict, "replays": replays }),
        ))
    }

    fn eigen_chain(&mut self) -> Result<(Status, Value)> {
        let c = ComplexRational::from_int;
        let window = (-20, 20);
        let span = (window.0 - 2, window.1 + 3);
        let cases = [
            (TestFunction::character(c(2)), vec![c(2)], c(2)),
            (TestFunction::tabulate(span.0, span.1, c), vec![c(1), c(1)], c(1)),
            (
                TestFunction::tabulate(span.0, span.1, |n| c(2).pow(n).unwrap() + c(3).pow(n).unwrap()),
                vec![c(2), c(3)],
                c(3),
            ),
        ];
        let mut rows = Vec::new();
        let mut ok = true;
        for (g, roots, z) in cases {
            let e = eigen_extract(&g, &roots, window)?;
            let h0 = e.h.eval(0)?;
            let forced = (window.0..=window.1).all(|n| e.h.eval(n).ok() == z.pow(n).ok().map(|p| &h0 * p));
            let good = e.z == z && forced;
            ok &= good;
            rows.push(json!({ "z": e.z.to_string(), "steps": e.steps, "forced_form": forced }));
        }
        Ok(outcome(ok, json!({ "window": [window.0, window.1], "cases": rows })))
    }

    fn certificate_replay(&mut self) -> Result<(Status, Value)> {
        let plan = match &self.replay.plan {
            Some(p) => p.clone(),
            None => self.extended_plan()?,
        };
        let recomputed = certificates_json(&certify(&plan)?);
        let given = self.replay.certificates.clone().unwrap_or_else(|| recomputed.clone());
        let parsed: Option<Vec<HitCertificate>> = serde_json::from_str(&given).ok();
        let round_trip = parsed.as_deref().map(certificates_json);
        let matches = given == recomputed && round_trip.as_deref() == Some(recomputed.as_str());
        let mismatch_at = given.bytes().zip(recomputed.bytes()).position(|(a, b)| a != b);
        Ok(outcome(
            matches,
            json!({
                "certificates": parsed.map(|c| c.len()),
                "bytes_match": matches,
                "first_mismatch": mismatch_at.or((given.len() != recomputed.len()).then_some(given.len().min(recomputed.len()))),
            }),
        ))
    }
}

/// Test vectors of the cyclicity item: `e_k` for `k` in `[-3, 3]` and two
/// mixed vectors supported outside that range.
pub fn cyclicity_tests() -> Vec<SparseVector> {
    let mut tests: Vec<SparseVector> = (-3..=3).map(SparseVector::unit).collect();
    tests.push(SparseVector::from_terms([
        (5, ComplexRational::one()),
        (-7, cr(1, 3, 0, 1)),
    ]));
    tests.push(SparseVector::from_terms([(4, cr(1, 2, 0, 1)), (8, cr(0, 1, -2, 3))]));
    tests
}

pub fn run_suite(config: SuiteConfig, replay: ReplayInput) -> Envelope<ItemReport> {
    Suite::new(config).with_replay(replay).run()
}

pub fn suite_passed(env: &Envelope<ItemReport>) -> bool {
    env.items.iter().all(|i| i.status != Status::Fail)
}

/// One line per item.
pub fn suite_text(env: &Envelope<ItemReport>) -> String {
    let mut out = String::new();
    for item in &env.items {
        let status = match item.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED",
        };
        out.push_str(&format!("item {:>2} {:<32} {status}\n", item.index, item.name));
    }
    out
}
