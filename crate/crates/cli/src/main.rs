use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use kloosterman_core::counting::{j_count_brute, j_count_fast, j_count_restricted, CountQuery};
use kloosterman_core::divisor::{error_term, family_error, main_term, thm33_rhs, TauTable};
use kloosterman_core::expsums::{
    gauss, kloosterman_brute, kloosterman_fast, ramanujan, salie, t_transform_brute, t_transform_fast,
};
use kloosterman_core::harness::{
    calibrate, run_identity_suite, run_sweep, CalibrationFile, CalibrationRequest, SuiteOptions, SweepConfig, Target,
};
use kloosterman_core::modarith::{factorize, is_prime};
use kloosterman_core::moments::{interval_short_enough, m_profile, moment, thm32_rhs};
use kloosterman_core::{Interval, Method, SumValue};

#[derive(Parser)]
#[command(name = "kloost", version, about = "Kloosterman sums, counting functions and bound sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a single exponential sum.
    Eval(EvalArgs),
    /// Exact counting functions.
    Count {
        #[command(subcommand)]
        what: CountCmd,
    },
    /// Run the identity suite; exits with status 1 on any failure.
    Suite(SuiteArgs),
    /// Calibrate the constant of one target (or `all`) and store it.
    Calibrate(CalibrateArgs),
    /// Run a bound sweep and write `<name>.csv` and `<name>.json`.
    Sweep(SweepArgs),
    /// Moments of short Kloosterman sums over a range of primes.
    Moments(MomentsArgs),
    /// Divisor sums in progressions.
    Divisor(DivisorArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SumKind {
    Kloosterman,
    Salie,
    Gauss,
    Ramanujan,
    T,
}

#[derive(Args)]
struct EvalArgs {
    kind: SumKind,
    #[arg(long)]
    q: u64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
    m: i64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
    n: i64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
    x: i64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
    y: i64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
    z: i64,
    /// Definition by direct summation only.
    #[arg(long, conflicts_with_all = ["fast", "both"])]
    brute: bool,
    /// Structured evaluation only (the default).
    #[arg(long, conflicts_with = "both")]
    fast: bool,
    /// Both routes and their difference.
    #[arg(long)]
    both: bool,
}

#[derive(Subcommand)]
enum CountCmd {
    /// `J_q(a, K)`, or `J_q(a, K; r, c)` when `--r` and `--c` are given.
    J {
        #[arg(long)]
        q: u64,
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long)]
        k: u64,
        #[arg(long, requires = "c")]
        r: Option<u64>,
        #[arg(long, allow_hyphen_values = true, requires = "r")]
        c: Option<i64>,
        /// Also count by the double loop.
        #[arg(long)]
        brute: bool,
    },
}

#[derive(Args)]
struct SuiteArgs {
    #[arg(long, default_value_t = 500)]
    budget: u64,
    /// Only run one module's identities.
    #[arg(long)]
    module: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Flip the sign of the fast Kloosterman value in its oracle check.
    #[arg(long)]
    inject_fault: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Target tag, or `all`.
    #[arg(long)]
    target: String,
    #[arg(long, default_value_t = 500)]
    cap: u64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Date stamp for the entry (defaults to today).
    #[arg(long)]
    date: Option<String>,
    #[arg(long, default_value = "calibration.json")]
    file: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the worker count in the config.
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "calibration.json")]
    calibration: PathBuf,
    /// File stem of the reports.
    #[arg(long, default_value = "sweep")]
    name: String,
}

#[derive(Args)]
struct MomentsArgs {
    #[arg(long)]
    p_min: u64,
    #[arg(long)]
    p_max: u64,
    /// `max` for the longest admissible interval, or an exponent `t` with `N = ⌊p^t⌋`.
    #[arg(long, default_value = "max")]
    n_rule: String,
    #[arg(long, default_value_t = 2)]
    r: u32,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// Calibration file supplying the constant; without it the constant is 1.
    #[arg(long)]
    calibration: Option<PathBuf>,
}

#[derive(Args)]
struct DivisorArgs {
    #[arg(long)]
    x: u64,
    #[arg(long)]
    q: u64,
    /// Single residue class.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "family")]
    a: Option<i64>,
    /// Family `{1, ..., A}` of residues.
    #[arg(long)]
    family: Option<u64>,
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
}

fn sum_json(v: &SumValue) -> Value {
    json!({ "re": v.value.re, "im": v.value.im, "abs": v.norm(), "method": v.method, "terms": v.terms })
}

fn modulus(q: u64) -> Result<kloosterman_core::FactoredModulus> {
    if q == 0 || q >= 1 << 63 {
        bail!("modulus q = {q} must lie in [1, 2^63)");
    }
    Ok(factorize(q))
}

fn eval(args: &EvalArgs) -> Result<Value> {
    let f = modulus(args.q)?;
    let (m, n) = (args.m, args.n);
    let (brute, fast) = match args.kind {
        SumKind::Kloosterman => (kloosterman_brute(m, n, &f), kloosterman_fast(m, n, &f)),
        SumKind::T => (t_transform_brute(args.x, args.y, args.z, &f), t_transform_fast(args.x, args.y, args.z, &f)),
        SumKind::Salie => {
            let s = salie(m, n, &f)?;
            (s, s)
        }
        SumKind::Gauss => {
            let g = gauss(m, n, args.q);
            (g, g)
        }
        SumKind::Ramanujan => {
            let b = kloosterman_brute(m, 0, &f);
            let mut c = b;
            c.value.re = ramanujan(m, &f) as f64;
            c.value.im = 0.0;
            c.method = Method::ClosedForm;
            c.terms = 1;
            (b, c)
        }
    };
    let mut out = json!({ "kind": format!("{:?}", args.kind).to_lowercase(), "q": args.q });
    match args.kind {
        SumKind::T => {
            out["x"] = json!(args.x);
            out["y"] = json!(args.y);
            out["z"] = json!(args.z);
        }
        SumKind::Ramanujan => out["m"] = json!(m),
        _ => {
            out["m"] = json!(m);
            out["n"] = json!(n);
        }
    }
    if args.brute || args.both {
        out["brute"] = sum_json(&brute);
    }
    if !args.brute {
        out["fast"] = sum_json(&fast);
    }
    if args.both {
        out["difference"] = json!((brute.value - fast.value).norm());
    }
    Ok(out)
}

fn count(cmd: &CountCmd) -> Result<Value> {
    let CountCmd::J { q, a, k, r, c, brute } = cmd;
    let f = modulus(*q)?;
    let mut query = CountQuery::new(&f, *a, *k)?;
    let mut out = json!({ "q": q, "a": a, "K": k });
    if let (Some(r), Some(c)) = (r, c) {
        query = query.restricted(*r, *c)?;
        out["r"] = json!(r);
        out["c"] = json!(c);
        out["count"] = json!(j_count_restricted(&query)?);
    } else {
        out["count"] = json!(j_count_fast(&query));
        if *brute {
            out["brute"] = json!(j_count_brute(&query));
        }
    }
    Ok(out)
}

fn today() -> String {
    chrono::Local::now().format("%Y-%m-%d").to_string()
}

fn calibrate_cmd(args: &CalibrateArgs) -> Result<Value> {
    let targets: Vec<Target> = if args.target == "all" {
        Target::all().into_iter().filter(|t| t.explicit_constant().is_none()).collect()
    } else {
        Target::expand(&args.target, &kloosterman_core::harness::R_VALUES)?
    };
    let mut file = CalibrationFile::load(&args.file)?;
    let date = args.date.clone().unwrap_or_else(today);
    let mut written = Vec::new();
    for target in targets {
        let req = CalibrationRequest { target, cap: args.cap, epsilon: args.epsilon, seed: args.seed, date: date.clone() };
        let entry = calibrate(&req).with_context(|| format!("calibrating {target}"))?;
        eprintln!("{}: max ratio {:.4}, constant {}", entry.target, entry.max_ratio, entry.constant);
        written.push(serde_json::to_value(file.upsert(entry))?);
    }
    file.save(&args.file)?;
    Ok(Value::Array(written))
}

fn sweep_cmd(args: &SweepArgs) -> Result<bool> {
    let mut config = SweepConfig::load(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(w) = args.workers {
        config.workers = w;
    }
    let cal = CalibrationFile::load(&args.calibration)?;
    let report = run_sweep(&config, &cal)?;
    report.write(&args.out, &args.name)?;
    for (target, s) in &report.summary {
        println!(
            "{target}: {} points, {} ok, {} violated, {} skipped, max ratio {:.4}",
            s.points, s.ok, s.violated, s.skipped, s.max_ratio
        );
    }
    Ok(report.violations() == 0)
}

fn moments_cmd(args: &MomentsArgs) -> Result<Value> {
    let tag = format!("thm3.2-r{}", args.r);
    let constant = match &args.calibration {
        Some(p) => CalibrationFile::load(p)?.get(&tag)?.constant,
        None => 1.0,
    };
    let mut rows = Vec::new();
    for p in (args.p_min..=args.p_max).filter(|&p| is_prime(p) && p > 2) {
        let n = if args.n_rule == "max" {
            let mut n = (p as f64).powf(1.0 - 1.0 / args.r as f64).floor().max(1.0) as u64;
            while n > 1 && !interval_short_enough(n, p, args.r) {
                n -= 1;
            }
            n
        } else {
            let t: f64 = args.n_rule.parse().context("--n-rule must be `max` or a number")?;
            ((p as f64).powf(t).floor() as u64).clamp(1, p - 1)
        };
        let profile = m_profile(p, &Interval::initial(n)?)?;
        let value = moment(&profile, args.alpha)?;
        let rhs = thm32_rhs(p, n, args.r, args.alpha, args.epsilon, constant);
        rows.push(json!({
            "p": p,
            "N": n,
            "moment": value,
            "rhs": rhs.as_ref().ok(),
            "ratio": rhs.as_ref().ok().map(|r| value / r),
            "skipped": rhs.err().map(|e| e.to_string()),
        }));
    }
    Ok(json!({ "r": args.r, "alpha": args.alpha, "epsilon": args.epsilon, "constant": constant, "rows": rows }))
}

fn divisor_cmd(args: &DivisorArgs) -> Result<Value> {
    let f = modulus(args.q)?;
    let tau = TauTable::new(args.x)?;
    let mut out = json!({ "X": args.x, "q": args.q, "main_term": main_term(args.x, &f) });
    match (args.a, args.family) {
        (Some(a), _) => {
            out["a"] = json!(a);
            out["sum"] = json!(tau.sum_ap(a, args.q)?);
            out["error"] = json!(error_term(&tau, a, &f)?);
        }
        (None, Some(len)) => {
            out["A"] = json!(len);
            out["family_error"] = json!(family_error(&tau, &Interval::initial(len)?, &f)?);
            out["rhs"] = match thm33_rhs(args.x, len, args.q, args.epsilon, 1.0) {
                Ok(v) => json!(v),
                Err(e) => json!(format!("skipped: {e}")),
            };
        }
        (None, None) => bail!("give --a or --family"),
    }
    Ok(out)
}

fn print(v: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Eval(a) => print(&eval(a)?)?,
        Command::Count { what } => print(&count(what)?)?,
        Command::Suite(a) => {
            let opts = SuiteOptions { module: a.module.clone(), budget: a.budget, seed: a.seed, fault: a.inject_fault };
            let report = run_identity_suite(&opts)?;
            let text = report.to_json()?;
            match &a.out {
                Some(p) => std::fs::write(p, text)?,
                None => print!("{text}"),
            }
            for c in report.checks.iter().filter(|c| !c.passed) {
                eprintln!("FAILED {}: {} ({} of {} cases)", c.module, c.identity, c.failures, c.cases);
            }
            return Ok(report.passed);
        }
        Command::Calibrate(a) => print(&calibrate_cmd(a)?)?,
        Command::Sweep(a) => return sweep_cmd(a),
        Command::Moments(a) => print(&moments_cmd(a)?)?,
        Command::Divisor(a) => print(&divisor_cmd(a)?)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
