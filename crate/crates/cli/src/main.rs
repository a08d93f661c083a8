//! `lcsw`: build, certify and probe weak-orbit plans from the command line.
//!
//! Exit codes: 0 success, 1 a verification failed, 2 the input did not parse,
//! 3 the computation could not be carried out.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lcs_workbench::builder::{build, certify, plan_extend, realize, Goal, StagePlan, CONSTRUCTION_NOTE};
use lcs_workbench::character::Character;
use lcs_workbench::exact::{parse_rational, ComplexRational};
use lcs_workbench::measure::FiniteMeasure;
use lcs_workbench::probe::{replay_report, run_cyclicity, CyclicityInputs, FunctionFamily};
use lcs_workbench::report::{
    certificates_json, cyclicity_tests, parse_goals, run_suite, suite_passed, suite_text, Envelope, ReplayInput,
    SuiteConfig, DEFAULT_SEED, DEFAULT_STAGE,
};
use lcs_workbench::shift::SparseVector;
use lcs_workbench::weak::base_prefix;
use lcs_workbench::witness::discontinuity_witness;
use lcs_workbench::Error;

#[derive(Parser, Debug)]
#[command(
    name = "lcsw",
    version,
    about = "Exact weak-orbit workbench for the weighted bilateral shift"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Directory for output files; nothing is written without it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CharKind {
    OffCircle,
    Root,
    Golden,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a plan from a goal file and certify every block.
    Build {
        #[arg(long)]
        goals: PathBuf,
        /// Initial window radius R.
        #[arg(long)]
        window: Option<i64>,
        /// Initial separation gap G; raised until G > 2R + 1.
        #[arg(long)]
        gap: Option<i64>,
    },
    /// Recompute the certificates of a plan, optionally comparing bytes with a file.
    Certify {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        certificates: Option<PathBuf>,
    },
    /// Extend a plan with Z+-density goals.
    Density {
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Reference times; defaults to -5..-1.
        #[arg(long = "m", allow_hyphen_values = true, value_delimiter = ',')]
        m: Vec<i64>,
        /// Test vectors are e_-r..e_r.
        #[arg(long, default_value_t = 2)]
        radius: i64,
        #[arg(long, default_value = "1/8")]
        eps: String,
    },
    /// Produce a discontinuity witness for a character.
    Character {
        #[arg(long, value_enum)]
        kind: CharKind,
        #[arg(long, default_value = "2")]
        re: String,
        #[arg(long, default_value = "0")]
        im: String,
        #[arg(long, default_value_t = 4)]
        q: u64,
        #[arg(long, default_value_t = 1, allow_negative_numbers = true)]
        r: i64,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        #[arg(long, default_value = "1/2")]
        eps: String,
        #[arg(long, default_value = "1")]
        delta: String,
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Run the cyclicity probe for delta_1 - delta_0, or replay a saved report.
    Cyclicity {
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_STAGE)]
        stage: u64,
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Run the acceptance battery.
    Suite {
        #[arg(long, default_value_t = DEFAULT_STAGE)]
        stage: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Plan whose certificates are replayed; defaults to the suite's own build.
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Certificate file to replay byte for byte.
        #[arg(long)]
        certificates: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn parse(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            kind: "parse",
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(m) => Failure::parse(m),
            other => Failure {
                code: 3,
                kind: "computation",
                message: other.to_string(),
            },
        }
    }
}

type Outcome = Result<(bool, Envelope<Value>, String, Vec<(&'static str, String)>), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))
}

fn read_plan(path: &Path) -> Result<StagePlan, Failure> {
    let plan: StagePlan =
        serde_json::from_str(&read(path)?).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    plan.check_invariants()?;
    Ok(plan)
}

fn rational(s: &str) -> Result<lcs_workbench::Rational, Failure> {
    parse_rational(s).map_err(|e| Failure::parse(e.to_string()))
}

fn pretty<T: serde::Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("values serialize")
}

fn cmd_build(goals: &Path, window: Option<i64>, gap: Option<i64>) -> Outcome {
    let goals = parse_goals(&read(goals)?)?;
    let count = goals.len();
    let mut start = StagePlan::new();
    if let Some(r) = window {
        if r < 1 {
            return Err(Failure::parse("--window must be at least 1"));
        }
        start.window_radius = r;
    }
    if let Some(g) = gap {
        if g < 1 {
            return Err(Failure::parse("--gap must be at least 1"));
        }
        start.separation_gap = g;
    }
    let plan = goals.into_iter().try_fold(start, |plan, g| plan_extend(&plan, g))?;
    let certs = certify(&plan)?;
    let ok = certs.iter().all(|c| c.valid);
    let zero = certs.iter().filter(|c| c.all_gaps_zero()).count();
    let items = vec![
        json!({ "goals": count, "valid": ok, "gaps_all_zero": zero, "hit_times": plan.blocks.iter().map(|b| b.hit_time).collect::<Vec<_>>() }),
    ];
    let text = format!("built {count} blocks; certificates valid: {ok}; exact-zero gaps: {zero}/{count}\n");
    let files = vec![
        ("plan.json", pretty(&plan)),
        ("vector.json", pretty(&realize(&plan))),
        ("certificates.json", certificates_json(&certs)),
    ];
    Ok((
        ok,
        Envelope::new(json!({ "command": "build", "construction": CONSTRUCTION_NOTE }), items),
        text,
        files,
    ))
}

fn cmd_certify(plan: &Path, certificates: Option<&Path>) -> Outcome {
    let plan = read_plan(plan)?;
    let certs = certify(&plan)?;
    let fresh = certificates_json(&certs);
    let valid = certs.iter().all(|c| c.valid);
    let matches = match certificates {
        Some(p) => Some(read(p)? == fresh),
        None => None,
    };
    let ok = valid && matches != Some(false);
    let text = format!(
        "{} certificates; valid: {valid}; replay match: {matches:?}\n",
        certs.len()
    );
    let items = vec![
        json!({ "certificates": serde_json::to_value(&certs).expect("serializes"), "valid": valid, "replay_match": matches }),
    ];
    let files = vec![("certificates.json", fresh)];
    Ok((ok, Envelope::new(json!({ "command": "certify" }), items), text, files))
}

fn cmd_density(plan: Option<&Path>, m: &[i64], radius: i64, eps: &str) -> Outcome {
    let mut plan = match plan {
        Some(p) => read_plan(p)?,
        None => StagePlan::new(),
    };
    let ms: Vec<i64> = if m.is_empty() { (-5..=-1).collect() } else { m.to_vec() };
    let tests: Vec<SparseVector> = (-radius..=radius).map(SparseVector::unit).collect();
    let eps = rational(eps)?;
    let first = plan.blocks.len();
    for &m in &ms {
        plan = plan_extend(
            &plan,
            Goal::ZPlusDensity {
                m,
                tests: tests.clone(),
                eps: eps.clone(),
            },
        )?;
    }
    let certs = certify(&plan)?;
    let new = &certs[first..];
    let ok = new.iter().all(|c| c.valid && c.hit_time > 0);
    let mut text = String::new();
    for c in new {
        text.push_str(&format!(
            "m = {:>3}: n = {:>5}, valid {}, gaps all zero {}\n",
            c.reference_time.unwrap_or_default(),
            c.hit_time,
            c.valid,
            c.all_gaps_zero()
        ));
    }
    let items = new
        .iter()
        .map(|c| serde_json::to_value(c).expect("serializes"))
        .collect();
    let files = vec![
        ("plan.json", pretty(&plan)),
        ("certificates.json", certificates_json(&certs)),
    ];
    Ok((
        ok,
        Envelope::new(json!({ "command": "density", "m": ms, "eps": eps.to_string() }), items),
        text,
        files,
    ))
}

#[allow(clippy::too_many_arguments)]
fn cmd_character(
    kind: CharKind,
    re: &str,
    im: &str,
    q: u64,
    r: i64,
    depth: usize,
    eps: &str,
    delta: &str,
    plan: Option<&Path>,
) -> Outcome {
    let ch = match kind {
        CharKind::OffCircle => Character::off_circle(ComplexRational::new(rational(re)?, rational(im)?))?,
        CharKind::Root => Character::root_of_unity(q, r)?,
        CharKind::Golden => Character::golden(depth),
    };
    let base = match plan {
        Some(p) => read_plan(p)?,
        None => StagePlan::new(),
    };
    let (next, report) = discontinuity_witness(
        &base,
        &ch,
        vec![SparseVector::unit(0)],
        rational(eps)?,
        rational(delta)?,
    )?;
    let text = format!(
        "witness times n = {}, m = {}; |z^n - z^m|^2 >= {}; verdict {}\n",
        report.times.0, report.times.1, report.separation2, report.verdict
    );
    let ok = report.verdict;
    let items = vec![serde_json::to_value(&report).expect("serializes")];
    let files = vec![("plan.json", pretty(&next)), ("witness.json", pretty(&report))];
    Ok((ok, Envelope::new(json!({ "command": "character" }), items), text, files))
}

fn cmd_cyclicity(plan: Option<&Path>, stage: u64, replay: Option<&Path>) -> Outcome {
    if let Some(path) = replay {
        let ok = replay_report(&read(path)?)?;
        let text = format!(
            "replay of {}: {}\n",
            path.display(),
            if ok { "bit-exact" } else { "MISMATCH" }
        );
        return Ok((
            ok,
            Envelope::new(
                json!({ "command": "cyclicity", "replay": true }),
                vec![json!({ "replay_match": ok })],
            ),
            text,
            vec![],
        ));
    }
    let plan = match plan {
        Some(p) => read_plan(p)?,
        None => build(base_prefix(32).into_iter().map(|spec| Goal::Hit { spec }))?,
    };
    let family = FunctionFamily::pullbacks(&plan, &cyclicity_tests());
    let mu = FiniteMeasure::unit(1).difference(&FiniteMeasure::unit(0));
    let report = run_cyclicity(CyclicityInputs {
        mu,
        family,
        plan,
        stage,
        roots: None,
    })?;
    let ok = report.no_obstruction();
    let text = format!(
        "stage {stage}: annihilator basis modulo constants has dimension {}; {}\n{}\n",
        report.basis.len(),
        report.verdict,
        report.disclaimer
    );
    let items =
        vec![json!({ "basis_dim": report.basis.len(), "verdict": report.verdict, "certified": report.certified })];
    let files = vec![("cyclicity.json", report.to_json())];
    Ok((
        ok,
        Envelope::new(json!({ "command": "cyclicity", "stage": stage }), items),
        text,
        files,
    ))
}

fn cmd_suite(stage: u64, seed: u64, plan: Option<&Path>, certificates: Option<&Path>) -> Outcome {
    let replay = ReplayInput {
        plan: plan.map(read_plan).transpose()?,
        certificates: certificates.map(read).transpose()?,
    };
    let config = SuiteConfig {
        stage,
        seed,
        ..SuiteConfig::default()
    };
    let env = run_suite(config, replay);
    let ok = suite_passed(&env);
    let text = suite_text(&env);
    let files = vec![
        ("report.json", env.stable_json()),
        ("metadata.json", pretty(&env.metadata)),
    ];
    let items = env
        .items
        .iter()
        .map(|i| serde_json::to_value(i).expect("serializes"))
        .collect();
    let mut out = Envelope::new(env.config.clone(), items);
    out.metadata = env.metadata;
    Ok((ok, out, text, files))
}

fn write_files(dir: &Path, files: &[(&str, String)]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure {
        code: 3,
        kind: "io",
        message: e.to_string(),
    };
    fs::create_dir_all(dir).map_err(io)?;
    for (name, body) in files {
        fs::write(dir.join(name), body).map_err(io)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build { goals, window, gap } => cmd_build(goals, *window, *gap),
        Command::Certify { plan, certificates } => cmd_certify(plan, certificates.as_deref()),
        Command::Density { plan, m, radius, eps } => cmd_density(plan.as_deref(), m, *radius, eps),
        Command::Character {
            kind,
            re,
            im,
            q,
            r,
            depth,
            eps,
            delta,
            plan,
        } => cmd_character(*kind, re, im, *q, *r, *depth, eps, delta, plan.as_deref()),
        Command::Cyclicity { plan, stage, replay } => cmd_cyclicity(plan.as_deref(), *stage, replay.as_deref()),
        Command::Suite {
            stage,
            seed,
            plan,
            certificates,
        } => cmd_suite(*stage, *seed, plan.as_deref(), certificates.as_deref()),
    };
    let outcome = result.and_then(|(ok, env, text, files)| {
        if let Some(dir) = &cli.out {
            write_files(dir, &files)?;
        }
        Ok((ok, env, text))
    });
    match outcome {
        Ok((ok, env, text)) => {
            match cli.format {
                Format::Json => println!("{}", env.full_json()),
                Format::Text => print!("{text}"),
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind, "message": f.message }));
            ExitCode::from(f.code)
        }
    }
}
