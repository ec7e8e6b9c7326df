//! `pbcast` command-line driver.
//!
//! Curves and maps are written as CSV (`%.12g` numbers, one `#` header line
//! echoing the configuration), verdicts as JSON. Exit codes: 0 success,
//! 2 invalid configuration, 3 numerically inconclusive result.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pbcast::*;
use serde::Serialize;
use serde_json::{json, Value};

const EXIT_INVALID: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "pbcast", version, about = "Poisson broadcast channel capacity tools")]
struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, env = "PBCAST_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Breakpoints and channel class as JSON.
    Classify(ClassifyArgs),
    /// Capacity-region boundary as CSV (lambda, r1, r2).
    Region(RegionArgs),
    /// Superposition, Marton and UV sum rates over an alpha range.
    Sumrates(SumratesArgs),
    /// Optimality map over (alpha, s2) for fixed s1.
    Sweep(SweepArgs),
    /// Skewed binary BC sweep over (p1, p2).
    Skewed(SkewedArgs),
    /// Parameter-box fractions: closed form and Monte Carlo.
    Fraction(FractionArgs),
    /// Run a command described by a JSON config file.
    Run(RunArgs),
}

#[derive(Args, Debug, Serialize)]
struct ClassifyArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    s1: f64,
    #[arg(long)]
    s2: f64,
    /// Average-power cap on the on-probability.
    #[arg(long)]
    sigma: Option<f64>,
    /// Grid size for the stronger-condition check on unresolved channels.
    #[arg(long, default_value_t = 4097)]
    stronger_grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct RegionArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    s1: f64,
    #[arg(long)]
    s2: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SumratesArgs {
    #[arg(long)]
    s1: f64,
    #[arg(long)]
    s2: f64,
    #[arg(long)]
    alpha_from: f64,
    #[arg(long)]
    alpha_to: f64,
    #[arg(long, default_value_t = 27)]
    steps: usize,
    #[arg(long, default_value_t = 64)]
    marton_starts: usize,
    #[arg(long, default_value_t = 12)]
    uv_starts: usize,
    #[arg(long, default_value_t = 0x5eed)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long)]
    s1: f64,
    #[arg(long)]
    s2_max: f64,
    #[arg(long, default_value_t = 100)]
    s2_steps: usize,
    #[arg(long, default_value_t = 1.2)]
    alpha_max: f64,
    #[arg(long, default_value_t = 100)]
    alpha_steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SkewedArgs {
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// Input-probability samples per envelope.
    #[arg(long, default_value_t = 1025)]
    input_grid: usize,
    #[arg(long, default_value_t = 101)]
    lambda_grid: usize,
    /// Per-cell CSV map; fractions always go to standard output as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct FractionArgs {
    #[arg(long)]
    b: f64,
    #[arg(long)]
    k: f64,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
}

enum Failure {
    Invalid(String),
    Inconclusive(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Invalid(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// C-style `%.12g`.
fn g12(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let trim = |s: &str| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..12).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa), exp.abs())
    } else {
        trim(&format!("{:.*}", (11 - exp) as usize, x))
    }
}

fn sink(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(io::BufWriter::new(fs::File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn csv_header(w: &mut dyn Write, command: &str, config: &impl Serialize, columns: &[&str]) -> io::Result<()> {
    let cfg = serde_json::to_string(config).expect("config serializes");
    writeln!(w, "# pbcast {command} {cfg}")?;
    writeln!(w, "{}", columns.join(","))
}

fn write_json(out: &Option<PathBuf>, value: &Value) -> io::Result<()> {
    let mut w = sink(out)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()
}

fn cmd_classify(a: &ClassifyArgs) -> CmdResult {
    let params = PbcParams::new(a.alpha, a.s1, a.s2)?;
    let (lo, hi) = if a.s1 <= a.s2 { (a.s1, a.s2) } else { (a.s2, a.s1) };
    let bp = breakpoints(lo, hi)?;
    let class = classify(&params);
    let mut summary = class.verdict.to_string();
    if let Some(r) = class.stronger_receiver {
        summary += &format!(" (receiver {})", r.number());
    }
    let mut report = Value::Null;
    let mut inconclusive = false;
    if class.verdict == Verdict::Unresolved {
        let r = stronger_condition_check(&params, a.stronger_grid)?;
        summary += match (r.optimal_receiver(), r.inconclusive()) {
            (Some(_), _) => "; stronger-condition: optimal",
            (None, true) => "; stronger-condition: inconclusive",
            (None, false) => "; stronger-condition: fails",
        };
        if let Some(rc) = r.optimal_receiver() {
            summary += &format!(" (receiver {})", rc.number());
        }
        inconclusive = r.optimal_receiver().is_none() && r.inconclusive();
        report = serde_json::to_value(r).expect("report serializes");
    }
    let thresholds = match a.sigma {
        Some(sigma) => serde_json::to_value(classify_avg_power(&params, sigma)?).expect("thresholds serialize"),
        None => Value::Null,
    };
    write_json(
        &a.out,
        &json!({
            "config": a,
            "summary": summary,
            "breakpoints": bp,
            "class": class,
            "stronger_condition": report,
            "average_power": thresholds,
        }),
    )?;
    if inconclusive {
        return Err(Failure::Inconclusive(summary));
    }
    Ok(())
}

fn cmd_region(a: &RegionArgs) -> CmdResult {
    let params = PbcParams::new(a.alpha, a.s1, a.s2)?;
    let boundary = match region_less_noisy(&params, a.points) {
        Ok(b) => b,
        Err(Error::RegimeMismatch { .. }) => match region_more_capable(&params, a.points) {
            Ok(b) => b,
            Err(Error::RegimeMismatch { .. }) => {
                return Err(Failure::Inconclusive(format!(
                    "capacity region not known for this channel ({})",
                    classify(&params)
                )))
            }
            Err(e) => return Err(e.into()),
        },
        Err(e) => return Err(e.into()),
    };
    let mut w = sink(&a.out)?;
    csv_header(&mut *w, "region", a, &["lambda", "r1", "r2"])?;
    for (pt, lambda) in boundary.points.iter().zip(&boundary.lambdas) {
        writeln!(w, "{},{},{}", g12(*lambda), g12(pt.r1), g12(pt.r2))?;
    }
    Ok(w.flush()?)
}

fn cmd_sumrates(a: &SumratesArgs) -> CmdResult {
    if a.steps < 1 {
        return Err(Failure::Invalid("steps must be at least 1".into()));
    }
    let mut w = sink(&a.out)?;
    csv_header(&mut *w, "sumrates", a, &["alpha", "superposition", "marton", "uv", "gap"])?;
    for i in 0..a.steps {
        let t = if a.steps == 1 { 0.0 } else { i as f64 / (a.steps - 1) as f64 };
        let alpha = a.alpha_from + t * (a.alpha_to - a.alpha_from);
        let params = PbcParams::new(alpha, a.s1, a.s2)?;
        let sup = superposition_sum_rate(&params);
        let marton = marton_sum_rate(
            &params,
            &MartonOptions {
                starts: a.marton_starts,
                seed: a.seed,
                ..MartonOptions::default()
            },
        )
        .value;
        let uv = uv_sum_rate(
            &params,
            &UvOptions {
                starts_per_map: a.uv_starts,
                seed: a.seed,
                ..UvOptions::default()
            },
        )
        .value;
        writeln!(w, "{},{},{},{},{}", g12(alpha), g12(sup), g12(marton), g12(uv), g12(uv - marton))?;
    }
    Ok(w.flush()?)
}

fn cmd_sweep(a: &SweepArgs) -> CmdResult {
    if a.s2_steps < 1 || a.alpha_steps < 1 {
        return Err(Failure::Invalid("grid step counts must be at least 1".into()));
    }
    let alphas: Vec<f64> = (0..=a.alpha_steps).map(|i| a.alpha_max * i as f64 / a.alpha_steps as f64).collect();
    let s2s: Vec<f64> = (1..=a.s2_steps).map(|j| a.s1 + (a.s2_max - a.s1) * j as f64 / a.s2_steps as f64).collect();
    let map = optimality_map(a.s1, &alphas, &s2s)?;
    let mut w = sink(&a.out)?;
    csv_header(&mut *w, "sweep", a, &["alpha", "s2", "cell", "verdict"])?;
    for (i, &alpha) in alphas.iter().enumerate() {
        for (j, &s2) in s2s.iter().enumerate() {
            let cell = match map.cell(i, j) {
                MapCell::Degraded => "degraded",
                MapCell::Optimal => "optimal",
                MapCell::Blank => "blank",
            };
            writeln!(w, "{},{},{cell},{}", g12(alpha), g12(s2), map.classes[i][j].verdict)?;
        }
    }
    Ok(w.flush()?)
}

fn dmbc_label(v: DmbcVerdict) -> String {
    match v {
        DmbcVerdict::MoreCapable(r) => format!("more-capable-{}", r.number()),
        DmbcVerdict::EffectivelyLessNoisy(r) => format!("effectively-less-noisy-{}", r.number()),
        DmbcVerdict::StrongerConditionOptimal(r) => format!("stronger-condition-{}", r.number()),
        DmbcVerdict::MartonExceedsSuperposition => "marton-exceeds".into(),
        DmbcVerdict::Unresolved => "unresolved".into(),
    }
}

fn cmd_skewed(a: &SkewedArgs) -> CmdResult {
    let opts = DmbcOptions {
        grid: a.input_grid,
        lambda_grid: a.lambda_grid,
        marton: true,
    };
    let sweep = skewed_sweep(a.grid, &opts)?;
    if let Some(path) = &a.out {
        let mut w = sink(&Some(path.clone()))?;
        csv_header(&mut *w, "skewed", a, &["p1", "p2", "verdict"])?;
        for i in 0..a.grid {
            for j in 0..a.grid {
                writeln!(w, "{},{},{}", g12(sweep.axis[i]), g12(sweep.axis[j]), dmbc_label(sweep.verdict(i, j)))?;
            }
        }
        w.flush()?;
    }
    write_json(&None, &json!({ "config": a, "fractions": sweep.fractions }))?;
    Ok(())
}

fn cmd_fraction(a: &FractionArgs) -> CmdResult {
    let spec = BoxSpec::new(a.b, a.k)?;
    let cf = fraction_closed_form(spec);
    let mc = fraction_monte_carlo(spec, a.samples, a.seed)?;
    let mut w = sink(&a.out)?;
    csv_header(&mut *w, "fraction", a, &["method", "less_noisy", "less_noisy_se", "degraded", "degraded_se"])?;
    writeln!(w, "closed-form,{},0,{},0", g12(cf.less_noisy), g12(cf.degraded))?;
    writeln!(
        w,
        "monte-carlo,{},{},{},{}",
        g12(mc.less_noisy),
        g12(mc.less_noisy_se),
        g12(mc.degraded),
        g12(mc.degraded_se)
    )?;
    Ok(w.flush()?)
}

/// Turns a JSON config object into command-line arguments, so the config
/// accepts exactly the flags of its subcommand.
fn config_to_argv(path: &Path) -> std::result::Result<Vec<String>, Failure> {
    let text = fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
    let Value::Object(map) = value else {
        return Err(Failure::Invalid("config must be a JSON object".into()));
    };
    let mut argv = vec!["pbcast".to_string()];
    let mut rest = Vec::new();
    let mut command = None;
    for (key, v) in map {
        if key == "command" {
            command = v.as_str().map(str::to_string);
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            Value::Null => {}
            Value::Number(n) => rest.extend([flag, n.to_string()]),
            Value::String(s) => rest.extend([flag, s]),
            other => return Err(Failure::Invalid(format!("unsupported value for {key}: {other}"))),
        }
    }
    let command = command.ok_or_else(|| Failure::Invalid("config needs a \"command\" string".into()))?;
    if command == "run" {
        return Err(Failure::Invalid("config cannot nest \"run\"".into()));
    }
    argv.push(command);
    argv.extend(rest);
    Ok(argv)
}

fn dispatch(command: &Command) -> CmdResult {
    match command {
        Command::Classify(a) => cmd_classify(a),
        Command::Region(a) => cmd_region(a),
        Command::Sumrates(a) => cmd_sumrates(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Skewed(a) => cmd_skewed(a),
        Command::Fraction(a) => cmd_fraction(a),
        Command::Run(a) => {
            let argv = config_to_argv(&a.config)?;
            let cli = Cli::try_parse_from(argv).map_err(|e| Failure::Invalid(e.to_string()))?;
            dispatch(&cli.command)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("pbcast: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    }
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("pbcast: invalid configuration: {msg}");
            ExitCode::from(EXIT_INVALID)
        }
        Err(Failure::Inconclusive(msg)) => {
            eprintln!("pbcast: inconclusive: {msg}");
            ExitCode::from(EXIT_INCONCLUSIVE)
        }
        Err(Failure::Io(e)) => {
            eprintln!("pbcast: {e}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::g12;

    #[test]
    fn matches_printf_g() {
        assert_eq!(g12(0.0), "0");
        assert_eq!(g12(1.0), "1");
        assert_eq!(g12(0.1), "0.1");
        assert_eq!(g12(-2.5), "-2.5");
        assert_eq!(g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(g12(123456789012.0), "123456789012");
        assert_eq!(g12(1234567890123.0), "1.23456789012e+12");
        assert_eq!(g12(1e-5), "1e-05");
        assert_eq!(g12(0.0001234), "0.0001234");
        assert_eq!(g12(0.085223403566), "0.085223403566");
    }
}
