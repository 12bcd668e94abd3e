//! Command-line front end.
//!
//! Every command writes one JSON document (or CSV table) to stdout and, on
//! failure, a JSON error object `{"error": {"code", "message"}}` to stderr.
//! Exit codes: 0 success or witness, 1 other failure, 2 validation,
//! 3 no witness in the search window, 4 budget exceeded, 5 oracle mismatch.

use std::io::Write;

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::boundary::{ratio_string, BoundaryPrefix, CylinderUnion, LatticeLog, RationalMass};
use crate::budget::{Budget, DEFAULT_BUDGET};
use crate::counting::{
    ball_slab_count, band_slab_count, band_sweep, ellipse_inclusion_check, horosphere_level_count,
    SlabQuery,
};
use crate::error::Error;
use crate::kernel::{
    admissibility_report, default_representatives, zeta_bruteforce, zeta_closed_form,
    zeta_support_bounds, AdmissibilityReport, DiscreteLatticeMeasure, KernelParams,
};
use crate::maharam::{lattice_certificate, maharam_orbit, maharam_product_orbit, MaharamPoint};
use crate::ratio::{
    parity_obstruction_check, parse_rational, ratio_witness_search, stable_witness_search,
    FinitePmpAction, ProductSet, SearchParams, SearchReport, SearchStatus, Target,
};
use crate::walk::EnumerationMode;
use crate::word::{hyperbolicity_defect, Rank};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OTHER: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NO_WITNESS: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_ORACLE: i32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Orbit,
    Exhaustive,
}

impl From<Mode> for EnumerationMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Orbit => EnumerationMode::Orbit,
            Mode::Exhaustive => EnumerationMode::Exhaustive,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ActionKind {
    Trivial,
    Sign,
}

#[derive(Debug, Parser)]
#[command(name = "stable-ratio", version, about = "Ratio sets and stable ratio sets of free-group boundary actions")]
pub struct Cli {
    #[arg(long, global = true, default_value_t = 2)]
    pub rank: u32,
    #[arg(long, global = true, default_value_t = 2)]
    pub rho: u32,
    /// Kernel scale; defaults to 3·rho.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Upper end of an n-range for stationarity checks.
    #[arg(long = "n-max", global = true)]
    pub n_max: Option<u32>,
    #[arg(long = "max-len", global = true, default_value_t = 6)]
    pub max_len: usize,
    #[arg(long, global = true, default_value_t = 8)]
    pub depth: usize,
    /// Visual metric parameter; defaults to ln(2r-1).
    #[arg(long = "epsilon-visual", global = true)]
    pub epsilon_visual: Option<f64>,
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Cylinder words of the set A, comma separated; `e` is the whole boundary.
    #[arg(long, global = true, default_value = "a")]
    pub set: String,
    /// Target value: `p/q`, integer, decimal, or `lattice:k`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t: Option<String>,
    #[arg(long, global = true, default_value = "1/100")]
    pub eps: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// The measures ζ_n with an enumeration cross-check.
    Zeta {
        #[arg(long, value_enum, default_value_t = Mode::Orbit)]
        mode: Mode,
        #[arg(long)]
        no_check: bool,
    },
    /// Exact admissibility certificate.
    Admissibility {
        #[arg(long, value_enum, default_value_t = Mode::Orbit)]
        mode: Mode,
    },
    /// Ratio-set witness search on a cylinder union.
    RatioSearch,
    /// Witness search on the product with a finite pmp action.
    StableSearch {
        #[arg(long, value_enum, default_value_t = ActionKind::Sign)]
        action: ActionKind,
        /// Fiber point x for A = set × {x}.
        #[arg(long, default_value_t = 0)]
        fiber: usize,
    },
    /// Parity certificate under the sign action.
    Parity,
    /// Seeded Maharam-extension orbit with lattice certificates.
    Maharam {
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
        #[arg(long = "word-len", default_value_t = 8)]
        word_len: usize,
    },
    /// Horofunction-slab counts.
    Count {
        #[command(subcommand)]
        query: CountQuery,
    },
    /// Ellipse inclusion check on B(e, r) ∩ h^-1(-∞, T]; T comes from --t.
    Ellipse {
        #[arg(long = "r-outer", default_value_t = 8)]
        r_outer: usize,
    },
    /// Four-point hyperbolicity defect of a ball.
    Defect {
        #[arg(long, default_value_t = 3)]
        radius: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum CountQuery {
    Level {
        #[arg(long)]
        m: usize,
        #[arg(long, allow_hyphen_values = true)]
        h: i64,
    },
    Ball {
        #[arg(long = "r-outer")]
        r_outer: usize,
        #[arg(long, allow_hyphen_values = true)]
        t1: i64,
        #[arg(long, allow_hyphen_values = true)]
        t2: i64,
    },
    Band {
        #[arg(long = "r-outer")]
        r_outer: usize,
        #[arg(long, allow_hyphen_values = true)]
        t1: i64,
        #[arg(long, allow_hyphen_values = true)]
        t2: i64,
        #[arg(long)]
        a: usize,
    },
    Sweep {
        #[arg(long = "r-min", default_value_t = 8)]
        r_min: usize,
        #[arg(long = "r-max", default_value_t = 14)]
        r_max: usize,
    },
}

/// The result of one invocation.
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Body {
    Json(Value),
    Csv(String),
}

struct Reply {
    body: Body,
    code: i32,
}

impl Reply {
    fn ok(body: Body) -> Self {
        Reply { body, code: EXIT_OK }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidRank(_)
        | Error::InvalidWord { .. }
        | Error::InvalidParams(_)
        | Error::Precondition(_)
        | Error::PrefixTooShort { .. }
        | Error::RefineCylinder { .. } => EXIT_VALIDATION,
        Error::BudgetExceeded { .. } => EXIT_BUDGET,
        Error::OracleMismatch(_) => EXIT_ORACLE,
        Error::Overflow(_) => EXIT_OTHER,
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// One header row and one data row; nested values are written as JSON.
fn object_csv(v: &Value) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    if let Value::Object(map) = v {
        w.write_record(map.keys()).expect("in-memory write");
        w.write_record(map.values().map(|x| match x {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }))
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

fn csv_of<F>(f: F) -> String
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("utf-8")
}

struct Ctx {
    rank: Rank,
    budget: Budget,
    cli_seed: u64,
}

impl Ctx {
    fn xi(&self, len: usize) -> BoundaryPrefix {
        BoundaryPrefix::random(self.rank, len, &mut ChaCha8Rng::seed_from_u64(self.cli_seed))
    }
}

fn kernel_params(cli: &Cli, rank: Rank) -> crate::error::Result<Vec<KernelParams>> {
    let n = cli.n.unwrap_or(3 * cli.rho);
    let n_max = cli.n_max.unwrap_or(n);
    if n_max < n {
        return Err(Error::params(format!("n-max {n_max} is below n {n}")));
    }
    (n..=n_max).map(|k| KernelParams::new(rank, cli.rho, k)).collect()
}

fn atoms_json(z: &DiscreteLatticeMeasure) -> Value {
    let rank = z.rank();
    let elements: Vec<Value> = z
        .atoms()
        .keys()
        .map(|k| {
            let v = k.exp(rank);
            json!({
                "k": k.k(),
                "value": ratio_string(&v),
                "value_real": v.to_f64(),
            })
        })
        .collect();
    json!({
        "atoms": to_value(z),
        "total_mass": z.total_mass().to_string(),
        "stable_ratio_elements": elements,
    })
}

fn cmd_zeta(cli: &Cli, ctx: &Ctx, mode: Mode, no_check: bool) -> crate::error::Result<Reply> {
    let params = kernel_params(cli, ctx.rank)?;
    let first = zeta_closed_form(&params[0]);
    let mut per_n = Vec::new();
    let mut stationary = true;
    let mut all_ok = true;
    for p in &params {
        let closed = zeta_closed_form(p);
        stationary &= closed == first;
        let check = if no_check {
            "skipped"
        } else {
            let xi = ctx.xi(p.required_prefix() + 2);
            let brute = zeta_bruteforce(&xi, p, mode.into(), &ctx.budget)?;
            if brute == closed {
                "ok"
            } else {
                all_ok = false;
                "mismatch"
            }
        };
        let (min_k, max_k) = zeta_support_bounds(p);
        per_n.push(json!({
            "n": p.n(),
            "check": check,
            "support_bounds": {"min_k": min_k, "max_k": max_k},
            "atom_count": closed.atoms().len(),
        }));
    }
    if cli.format == Format::Csv {
        let body = csv_of(|b| first.write_csv(b));
        let code = if all_ok { EXIT_OK } else { EXIT_ORACLE };
        return Ok(Reply {
            body: Body::Csv(body),
            code,
        });
    }
    let (min_k, max_k) = zeta_support_bounds(&params[0]);
    let mut out = atoms_json(&first);
    let obj = out.as_object_mut().expect("object");
    obj.insert("command".into(), json!("zeta"));
    obj.insert("rank".into(), json!(ctx.rank.get()));
    obj.insert("rho".into(), json!(cli.rho));
    obj.insert("n".into(), json!(params[0].n()));
    obj.insert("n_max".into(), json!(params[params.len() - 1].n()));
    obj.insert("check_mode".into(), to_value(&EnumerationMode::from(mode)));
    obj.insert(
        "check".into(),
        json!(if no_check { "skipped" } else if all_ok { "ok" } else { "mismatch" }),
    );
    obj.insert("support_bounds".into(), json!({"min_k": min_k, "max_k": max_k}));
    obj.insert("stationary".into(), json!(stationary));
    obj.insert("per_n".into(), Value::Array(per_n));
    Ok(Reply {
        body: Body::Json(out),
        code: if all_ok && stationary { EXIT_OK } else { EXIT_ORACLE },
    })
}

fn cmd_admissibility(cli: &Cli, ctx: &Ctx, mode: Mode) -> crate::error::Result<Reply> {
    let params = kernel_params(cli, ctx.rank)?;
    let eps = cli
        .epsilon_visual
        .unwrap_or_else(|| f64::from(ctx.rank.branching()).ln());
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::params("epsilon-visual must be positive"));
    }
    let mut reports: Vec<AdmissibilityReport> = Vec::new();
    for p in &params {
        let reps = default_representatives(ctx.rank, p, cli.seed);
        reports.push(admissibility_report(p, &reps, eps, mode.into(), &ctx.budget)?);
    }
    let c1_exact = reports.iter().all(|r| r.c1_total == RationalMass::one());
    let mut bracket: Vec<Value> = Vec::new();
    for i in 0..3 {
        let vals: Vec<&RationalMass> = reports.iter().map(|r| &r.c4_bounds[i]).collect();
        let lo = vals.iter().min().expect("nonempty");
        let hi = vals.iter().max().expect("nonempty");
        bracket.push(json!({"min": lo.to_string(), "max": hi.to_string(), "min_real": lo.to_f64(), "max_real": hi.to_f64()}));
    }
    if cli.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "n", "c1_total", "gromov_min_pair", "gromov_min_translated", "beta_n", "c3_sup", "c4_1",
            "c4_2", "c4_3",
        ])
        .expect("in-memory write");
        for r in &reports {
            w.write_record([
                r.params.n().to_string(),
                r.c1_total.to_string(),
                r.gromov_min_pair.to_string(),
                r.gromov_min_translated.to_string(),
                r.beta_n.to_string(),
                r.c3_sup.to_string(),
                r.c4_bounds[0].to_string(),
                r.c4_bounds[1].to_string(),
                r.c4_bounds[2].to_string(),
            ])
            .expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
        return Ok(Reply::ok(Body::Csv(body)));
    }
    let out = json!({
        "command": "admissibility",
        "c1_exact": c1_exact,
        "c4_bracket": bracket,
        "reports": to_value(&reports),
    });
    Ok(Reply {
        body: Body::Json(out),
        code: if c1_exact { EXIT_OK } else { EXIT_ORACLE },
    })
}

fn parse_set(cli: &Cli, rank: Rank) -> crate::error::Result<CylinderUnion> {
    let words: Vec<&str> = cli.set.split(',').map(str::trim).collect();
    let u = CylinderUnion::parse(rank, &words)?;
    if u.is_empty() {
        return Err(Error::params("--set is empty"));
    }
    Ok(u)
}

fn search_params(cli: &Cli) -> crate::error::Result<SearchParams> {
    let t = cli
        .t
        .as_deref()
        .ok_or_else(|| Error::params("--t is required"))?;
    SearchParams::new(Target::parse(t)?, parse_rational(&cli.eps)?, cli.max_len, cli.depth)
}

fn search_reply(cli: &Cli, rep: &SearchReport) -> Reply {
    let code = match rep.status {
        SearchStatus::Witness => EXIT_OK,
        SearchStatus::Exhausted => EXIT_NO_WITNESS,
    };
    let v = to_value(rep);
    let body = match cli.format {
        Format::Json => Body::Json(v),
        Format::Csv => Body::Csv(object_csv(&v)),
    };
    Reply { body, code }
}

fn cmd_ratio_search(cli: &Cli, ctx: &Ctx) -> crate::error::Result<Reply> {
    let a = parse_set(cli, ctx.rank)?;
    let rep = ratio_witness_search(&a, &search_params(cli)?, &ctx.budget)?;
    Ok(search_reply(cli, &rep))
}

fn cmd_stable_search(cli: &Cli, ctx: &Ctx, kind: ActionKind, fiber: usize) -> crate::error::Result<Reply> {
    let action = match kind {
        ActionKind::Trivial => FinitePmpAction::trivial(ctx.rank),
        ActionKind::Sign => FinitePmpAction::sign(ctx.rank),
    };
    if fiber >= action.size() {
        return Err(Error::params(format!("fiber {fiber} is outside the action")));
    }
    let a = ProductSet::from_base(&parse_set(cli, ctx.rank)?, fiber);
    let rep = stable_witness_search(&a, &action, &search_params(cli)?, &ctx.budget)?;
    Ok(search_reply(cli, &rep))
}

fn cmd_parity(cli: &Cli, ctx: &Ctx) -> crate::error::Result<Reply> {
    let rep = parity_obstruction_check(ctx.rank, cli.max_len, &ctx.budget)?;
    let clean = rep.odd_length_violations == 0 && rep.odd_exponent_violations == 0;
    let mut v = to_value(&rep);
    v.as_object_mut()
        .expect("object")
        .insert("command".into(), json!("parity"));
    let body = match cli.format {
        Format::Json => Body::Json(v),
        Format::Csv => Body::Csv(object_csv(&v)),
    };
    Ok(Reply {
        body,
        code: if clean { EXIT_OK } else { EXIT_ORACLE },
    })
}

fn cmd_maharam(cli: &Cli, ctx: &Ctx, steps: usize, word_len: usize) -> crate::error::Result<Reply> {
    let start = MaharamPoint::new(ctx.xi(word_len + steps), LatticeLog(0));
    let orbit = maharam_orbit(ctx.rank, &start, word_len, steps, cli.seed)?;
    let cert = lattice_certificate(ctx.rank, &orbit)?;
    let sign = FinitePmpAction::sign(ctx.rank);
    let fiber_orbit = maharam_product_orbit(ctx.rank, &start, &sign, 0, word_len, steps, cli.seed)?;
    let fiber_cert = lattice_certificate(ctx.rank, &fiber_orbit)?;
    let clean = cert.exceptions == 0 && fiber_cert.exceptions == 0 && fiber_cert.odd_fiber_returns == 0;
    let code = if clean { EXIT_OK } else { EXIT_ORACLE };
    if cli.format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["step", "letter", "base", "t_exponent", "t_real", "fiber"])
            .expect("in-memory write");
        for (s, f) in orbit.iter().zip(&fiber_orbit) {
            w.write_record([
                s.step.to_string(),
                s.letter.as_ref().map(|l| l.to_string()).unwrap_or_default(),
                s.point.base.word().to_string(),
                s.point.t_exponent.to_string(),
                s.point.t_exponent.to_f64(ctx.rank).to_string(),
                f.fiber.map(|x| x.to_string()).unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        let body = String::from_utf8(w.into_inner().expect("flush")).expect("utf-8");
        return Ok(Reply {
            body: Body::Csv(body),
            code,
        });
    }
    let out = json!({
        "command": "maharam",
        "steps": steps,
        "word_len": word_len,
        "start": to_value(&orbit[0].point),
        "end": to_value(&orbit[orbit.len() - 1].point),
        "certificate": to_value(&cert),
        "fiber_certificate": to_value(&fiber_cert),
    });
    Ok(Reply {
        body: Body::Json(out),
        code,
    })
}

fn cmd_count(cli: &Cli, ctx: &Ctx, q: &CountQuery) -> crate::error::Result<Reply> {
    let value = match q {
        CountQuery::Level { m, h } => {
            let xi = ctx.xi(*m);
            let c = horosphere_level_count(ctx.rank, *m, *h, &xi)?;
            json!({"command": "count-level", "m": m, "h": h, "exact_count": c.to_string()})
        }
        CountQuery::Ball { r_outer, t1, t2 } => {
            let q = SlabQuery::new(ctx.xi(*r_outer), *t1, *t2, *r_outer, 0)?;
            to_value(&ball_slab_count(ctx.rank, &q)?)
        }
        CountQuery::Band { r_outer, t1, t2, a } => {
            if *a == 0 {
                return Err(Error::params("band width a must be at least 1"));
            }
            let q = SlabQuery::new(ctx.xi(*r_outer), *t1, *t2, *r_outer, *a)?;
            to_value(&band_slab_count(ctx.rank, &q)?)
        }
        CountQuery::Sweep { r_min, r_max } => {
            let sweep = band_sweep(ctx.rank, &ctx.xi(*r_max), (*r_min, *r_max), &[2, 3], &[2, 4])?;
            if cli.format == Format::Csv {
                return Ok(Reply::ok(Body::Csv(csv_of(|b| sweep.write_csv(b)))));
            }
            to_value(&sweep)
        }
    };
    Ok(Reply::ok(match cli.format {
        Format::Json => Body::Json(value),
        Format::Csv => Body::Csv(object_csv(&value)),
    }))
}

fn cmd_ellipse(cli: &Cli, ctx: &Ctx, r_outer: usize) -> crate::error::Result<Reply> {
    let t = match cli.t.as_deref() {
        None => 0,
        Some(s) => s
            .trim()
            .parse::<i64>()
            .map_err(|_| Error::params(format!("ellipse needs an integer --t, got {s:?}")))?,
    };
    let rep = ellipse_inclusion_check(ctx.rank, r_outer, t, &ctx.xi(r_outer + 2), &ctx.budget)?;
    let ok = rep.inner_inclusion && rep.outer_inclusion;
    let v = to_value(&rep);
    Ok(Reply {
        body: match cli.format {
            Format::Json => Body::Json(v),
            Format::Csv => Body::Csv(object_csv(&v)),
        },
        code: if ok { EXIT_OK } else { EXIT_ORACLE },
    })
}

fn cmd_defect(cli: &Cli, ctx: &Ctx, radius: usize) -> crate::error::Result<Reply> {
    let d = hyperbolicity_defect(ctx.rank, radius, &ctx.budget)?;
    let q = BigRational::new(BigInt::from(*d.numer()), BigInt::from(*d.denom()));
    let v = json!({
        "command": "defect",
        "radius": radius,
        "defect": ratio_string(&q),
        "defect_real": q.to_f64(),
    });
    Ok(Reply::ok(match cli.format {
        Format::Json => Body::Json(v),
        Format::Csv => Body::Csv(object_csv(&v)),
    }))
}

fn dispatch(cli: &Cli) -> crate::error::Result<Reply> {
    let ctx = Ctx {
        rank: Rank::new(cli.rank)?,
        budget: Budget::new(cli.budget),
        cli_seed: cli.seed,
    };
    match &cli.command {
        Command::Zeta { mode, no_check } => cmd_zeta(cli, &ctx, *mode, *no_check),
        Command::Admissibility { mode } => cmd_admissibility(cli, &ctx, *mode),
        Command::RatioSearch => cmd_ratio_search(cli, &ctx),
        Command::StableSearch { action, fiber } => cmd_stable_search(cli, &ctx, *action, *fiber),
        Command::Parity => cmd_parity(cli, &ctx),
        Command::Maharam { steps, word_len } => cmd_maharam(cli, &ctx, *steps, *word_len),
        Command::Count { query } => cmd_count(cli, &ctx, query),
        Command::Ellipse { r_outer } => cmd_ellipse(cli, &ctx, *r_outer),
        Command::Defect { radius } => cmd_defect(cli, &ctx, *radius),
    }
}

fn error_json(code: &str, message: &str) -> String {
    let mut s = json!({"error": {"code": code, "message": message}}).to_string();
    s.push('\n');
    s
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: e.to_string(),
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: EXIT_VALIDATION,
                    stdout: String::new(),
                    stderr: error_json("validation", e.to_string().trim()),
                },
            };
        }
    };
    match dispatch(&cli) {
        Ok(reply) => {
            let stdout = match reply.body {
                Body::Json(v) => {
                    let mut s = serde_json::to_string_pretty(&v).expect("json");
                    s.push('\n');
                    s
                }
                Body::Csv(s) => s,
            };
            Outcome {
                code: reply.code,
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => Outcome {
            code: exit_code(&e),
            stdout: String::new(),
            stderr: error_json(e.code(), &e.to_string()),
        },
    }
}

/// Entry point for the binary.
pub fn main_with_args() -> i32 {
    let out = run(std::env::args_os());
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    out.code
}
