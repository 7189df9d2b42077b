use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dyadic_harmonic::averaging::{AveragingConfig, ScaleWindow};
use dyadic_harmonic::fourier::SpectralPolynomial;
use dyadic_harmonic::hankel::DEFAULT_NEHARI_ITERATIONS;
use dyadic_harmonic::harness::{self, SCHEMA};
use dyadic_harmonic::power::DEFAULT_MAX_ITERATIONS;

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_ERROR: u8 = 3;

/// Reproducible experiments on dyadic step functions and Hankel operators.
///
/// Exit status: 0 success, 1 a certified tolerance was violated, 2 usage or
/// configuration error (nothing written), 3 computation error. Thread count
/// follows RAYON_NUM_THREADS and never changes the output.
#[derive(Parser, Debug)]
#[command(name = "dyadic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact identity suites. CSV columns: identity,instances,max_residual,tolerance,passed
    Verify(VerifyArgs),
    /// Norm comparisons with ensemble quantiles (JSON only).
    Norms(NormsArgs),
    /// Averaged Haar shift against the Hilbert transform.
    /// CSV columns: function,x,averaged,exact. With --format csv the JSON
    /// summary goes to --summary, or stderr when absent. --gamma-out writes
    /// x,gamma0 on a 1e-3 grid over [-1.5, 1.5].
    ShiftAverage(ShiftArgs),
    /// Re-derives the degenerate-term constants and prints the calibration report.
    Calibrate,
    /// Hankel norms with Nehari lower and upper bounds.
    /// CSV columns: index,sigma0,lower,inf_estimate,gap,budget,seed,identity_residual,sandwich_holds
    Hankel(HankelArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Output {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args, Debug, Clone, Serialize)]
struct VerifyArgs {
    #[arg(long, default_value_t = 6, allow_negative_numbers = true,
          value_parser = clap::value_parser!(u32).range(0..=harness::MAX_DEPTH as i64))]
    depth: u32,
    /// Random instances per identity.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    ensemble: u64,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
struct NormsArgs {
    #[arg(long, default_value_t = 6, allow_negative_numbers = true,
          value_parser = clap::value_parser!(u32).range(1..=harness::MAX_DEPTH as i64))]
    depth: u32,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    ensemble: u64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS as u64, value_parser = clap::value_parser!(u64).range(1..))]
    power_iters: u64,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ShiftArgs {
    /// Translation range.
    #[arg(long = "Y", default_value_t = 1024.0)]
    #[serde(rename = "Y")]
    y_range: f64,
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..))]
    samples_y: u64,
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..))]
    samples_lambda: u64,
    /// Scale window `a:b`, finest to coarsest.
    #[arg(long, default_value = "-8:12", allow_hyphen_values = true)]
    scales: String,
    /// Comma-separated test functions: indicator, stacked, skewed.
    #[arg(long, value_delimiter = ',', default_value = "indicator,stacked,skewed")]
    functions: Vec<String>,
    #[arg(long)]
    gamma_out: Option<PathBuf>,
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Args, Debug, Clone, Serialize)]
struct HankelArgs {
    /// Number of random symbols; ignored with --symbol.
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    ensemble: u64,
    #[arg(long, default_value_t = 4)]
    band: usize,
    /// Anti-analytic degree budget for the upper bound.
    #[arg(long, default_value_t = 16)]
    budget: usize,
    /// Sampled test functions for the lower bound.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = DEFAULT_NEHARI_ITERATIONS)]
    iterations: usize,
    /// A single symbol as JSON `[[k, re, im], ...]`, or `@path` to a file.
    #[arg(long)]
    symbol: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    output: Output,
}

#[derive(Serialize)]
struct Report<'a, C: Serialize, B: Serialize> {
    schema: u32,
    command: &'a str,
    config: &'a C,
    #[serde(flatten)]
    body: B,
}

enum Failure {
    Usage(String),
    Compute(String),
}

impl From<dyadic_harmonic::Error> for Failure {
    fn from(e: dyadic_harmonic::Error) -> Self {
        match e {
            dyadic_harmonic::Error::InvalidConfig(m) => Failure::Usage(m),
            other => Failure::Compute(other.to_string()),
        }
    }
}

/// Primary artifact plus whether every certified check passed.
struct Outcome {
    text: String,
    passed: bool,
    extra: Vec<(Option<PathBuf>, String)>,
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn verify(args: &VerifyArgs) -> Result<Outcome, Failure> {
    let checks = harness::verify_suites(args.depth, args.output.seed, args.ensemble as usize)?;
    let passed = checks.iter().all(|c| c.passed);
    let text = match args.output.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                checks: &'a [harness::IdentityCheck],
                all_passed: bool,
            }
            json(&Report {
                schema: SCHEMA,
                command: "verify",
                config: args,
                body: Body {
                    checks: &checks,
                    all_passed: passed,
                },
            })
        }
        Format::Csv => {
            let mut s = String::from("identity,instances,max_residual,tolerance,passed\n");
            for c in &checks {
                let _ = writeln!(s, "{},{},{:?},{:?},{}", c.identity, c.instances, c.max_residual, c.tolerance, c.passed);
            }
            s
        }
    };
    Ok(Outcome { text, passed, extra: vec![] })
}

fn norms(args: &NormsArgs) -> Result<Outcome, Failure> {
    if args.output.format == Format::Csv {
        return Err(Failure::Usage("norms reports are JSON only".into()));
    }
    let sections = harness::norms_sections(
        args.depth,
        args.output.seed,
        args.ensemble as usize,
        args.power_iters as usize,
    )?;
    let text = json(&Report {
        schema: SCHEMA,
        command: "norms",
        config: args,
        body: sections,
    });
    Ok(Outcome { text, passed: true, extra: vec![] })
}

fn shift_average(args: &ShiftArgs) -> Result<Outcome, Failure> {
    let scales: ScaleWindow = args.scales.parse().map_err(|e: dyadic_harmonic::Error| Failure::Usage(e.to_string()))?;
    let functions: Vec<String> = args.functions.iter().filter(|f| !f.is_empty()).cloned().collect();
    if functions.is_empty() {
        return Err(Failure::Usage("--functions must name at least one test function".into()));
    }
    let cfg = AveragingConfig {
        y_range: args.y_range,
        n_y: args.samples_y as usize,
        n_lambda: args.samples_lambda as usize,
        scales,
        seed: args.output.seed,
    };
    cfg.validate()?;
    let (fit, rows) = harness::shift_average_run(&functions, &cfg)?;
    let summary = json(&Report {
        schema: SCHEMA,
        command: "shift-average",
        config: args,
        body: &fit,
    });
    let mut extra = Vec::new();
    if let Some(path) = &args.gamma_out {
        let mut s = String::from("x,gamma0\n");
        for (x, g) in harness::gamma0_samples() {
            let _ = writeln!(s, "{x:?},{g:?}");
        }
        extra.push((Some(path.clone()), s));
    }
    let text = match args.output.format {
        Format::Json => summary,
        Format::Csv => {
            extra.push((args.summary.clone(), summary));
            let mut s = String::from("function,x,averaged,exact\n");
            for r in &rows {
                let _ = writeln!(s, "{},{:?},{:?},{:?}", r.function, r.x, r.averaged, r.exact);
            }
            s
        }
    };
    Ok(Outcome { text, passed: true, extra })
}

fn hankel(args: &HankelArgs) -> Result<Outcome, Failure> {
    let symbols = match &args.symbol {
        Some(spec) => {
            let raw = match spec.strip_prefix('@') {
                Some(path) => std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{path}: {e}")))?,
                None => spec.clone(),
            };
            let b: SpectralPolynomial =
                serde_json::from_str(&raw).map_err(|e| Failure::Usage(format!("symbol: {e}")))?;
            vec![b]
        }
        None => harness::random_symbols(args.ensemble as usize, args.band, args.output.seed),
    };
    if let Some(b) = symbols.iter().find(|b| b.band() > args.budget) {
        return Err(Failure::Usage(format!("--budget {} is below the symbol band {}", args.budget, b.band())));
    }
    let entries = harness::hankel_batch(&symbols, args.budget, args.samples, args.output.seed, args.iterations)?;
    let passed = entries
        .iter()
        .all(|e| e.sandwich_holds && e.identity_residual <= harness::SPECTRAL_TOLERANCE);
    let text = match args.output.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                entries: &'a [harness::HankelEntry],
                all_passed: bool,
            }
            json(&Report {
                schema: SCHEMA,
                command: "hankel",
                config: args,
                body: Body {
                    entries: &entries,
                    all_passed: passed,
                },
            })
        }
        Format::Csv => {
            let mut s = String::from("index,sigma0,lower,inf_estimate,gap,budget,seed,identity_residual,sandwich_holds\n");
            for e in &entries {
                let r = &e.report;
                let _ = writeln!(
                    s,
                    "{},{:?},{:?},{:?},{:?},{},{},{:?},{}",
                    e.index, r.sigma0, r.lower, r.inf_estimate, r.gap, r.budget, r.seed, e.identity_residual, e.sandwich_holds
                );
            }
            s
        }
    };
    Ok(Outcome { text, passed, extra: vec![] })
}

fn calibrate() -> Result<Outcome, Failure> {
    let c = harness::fresh_calibration()?;
    let passed = c.max_residual <= harness::STEP_TOLERANCE;
    Ok(Outcome { text: json(&c), passed, extra: vec![] })
}

fn emit(path: Option<&PathBuf>, text: &str, fallback_stderr: bool) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None if fallback_stderr => {
            eprint!("{text}");
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, out) = match &cli.command {
        Command::Verify(a) => (verify(a), a.output.out.clone()),
        Command::Norms(a) => (norms(a), a.output.out.clone()),
        Command::ShiftAverage(a) => (shift_average(a), a.output.out.clone()),
        Command::Hankel(a) => (hankel(a), a.output.out.clone()),
        Command::Calibrate => (calibrate(), None),
    };
    match result {
        Ok(outcome) => {
            let written = emit(out.as_ref(), &outcome.text, false).and_then(|_| {
                outcome
                    .extra
                    .iter()
                    .try_for_each(|(path, text)| emit(path.as_ref(), text, true))
            });
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_ERROR);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAILED)
            }
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Compute(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
