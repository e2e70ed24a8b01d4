//! Argument parsing and dispatch. Usage errors exit with 2; computational
//! errors print a JSON diagnostic on stderr and exit with 1.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mathieu_core::butterfly::{frequency_rows, numerators};
use mathieu_core::contfrac::{
    convergents, expand, growth_check, parity_admissible_fractions, parity_check, tails, ContinuedFraction,
    ReducedFraction,
};
use mathieu_core::contour::{recursion_check, sum_bound_check, QuadratureConfig};
use mathieu_core::discriminant::{consistency_of, sigma_prime0, Discriminant};
use mathieu_core::spectrum::extract;
use mathieu_core::trigsums::{
    digamma_weighted_sum, f_brute, f_closed, f_total, l_direct, l_formula, s_k, sum_bound, SumContext,
};
use mathieu_core::verify::{
    check_all, check_containment, check_gap_inheritance, check_lemma1, check_lemma2, check_theorem3, Constants,
    ContainmentReport, GapInheritanceReport, VerificationReport,
};
use mathieu_core::Error;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::export::{bands_csv, butterfly_csv, gaps_csv, render_svg};
use crate::format::to_json;

#[derive(Debug, Parser)]
#[command(name = "mathieu", version, about = "Band structure of the critical almost Mathieu operator at rational frequency")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Continued fraction, convergents, tails and growth conditions.
    Cf(FrequencyArgs),
    /// The discriminant at one energy, and its slope at 0 for odd q.
    Sigma(SigmaArgs),
    /// Bands and gaps of one odd-q frequency.
    Spectrum(TableArgs),
    /// Gaps only.
    Gaps(TableArgs),
    /// Kernel table, weighted sum and the two routes to its logarithm.
    Sums(SumsArgs),
    /// Both sides of the contour-integral recursion.
    Recursion(RecursionArgs),
    /// Inequality and identity checks.
    Verify(VerifyArgs),
    /// Band rows over all frequencies up to a maximal denominator.
    Butterfly(ButterflyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteArg {
    All,
    Lemma1,
    Lemma2,
    Thm3,
    Thm4,
}

#[derive(Debug, Args)]
pub struct FrequencyArgs {
    #[arg(short = 'p')]
    pub p: Option<u64>,
    #[arg(short = 'q')]
    pub q: Option<u64>,
    /// Comma-separated partial quotients, e.g. `1,2,100`.
    #[arg(long = "cf", value_parser = parse_cf)]
    pub cf: Option<ContinuedFraction>,
    /// Growth exponent for the convergent-growth conditions.
    #[arg(long, default_value_t = 56.0)]
    pub kappa: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SigmaArgs {
    #[arg(short = 'p')]
    pub p: u64,
    #[arg(short = 'q')]
    pub q: u64,
    #[arg(short = 'E', long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub energy: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(short = 'p')]
    pub p: u64,
    #[arg(short = 'q')]
    pub q: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SumsArgs {
    #[arg(short = 'p')]
    pub p: u64,
    #[arg(short = 'q')]
    pub q: u64,
    #[arg(short = 'k')]
    pub k: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RecursionArgs {
    #[arg(long = "cf", value_parser = parse_cf)]
    pub cf: ContinuedFraction,
    #[arg(short = 'k')]
    pub k: u64,
    /// Absolute tolerance of each contour integral.
    #[arg(long, default_value_t = QuadratureConfig::default().tol)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    pub suite: SuiteArg,
    #[arg(short = 'p')]
    pub p: Option<u64>,
    #[arg(short = 'q')]
    pub q: Option<u64>,
    #[arg(long = "cf", value_parser = parse_cf)]
    pub cf: Option<ContinuedFraction>,
    /// Run the suite over every parity-admissible fraction with `q <= qmax`.
    #[arg(long)]
    pub qmax: Option<u64>,
    #[arg(long, default_value_t = 56.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ButterflyArgs {
    #[arg(long)]
    pub qmax: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_cf(s: &str) -> Result<ContinuedFraction, String> {
    s.parse::<ContinuedFraction>().map_err(|e| e.to_string())
}

/// A failure after the arguments were accepted.
#[derive(Debug)]
pub enum Failure {
    Compute(Error),
    Io(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Outcome = Result<(String, bool), Failure>;

/// `-cf` is accepted as a spelling of `--cf`.
fn normalize_args<I: IntoIterator<Item = OsString>>(args: I) -> Vec<OsString> {
    args.into_iter()
        .map(|a| match a.to_str() {
            Some("-cf") => OsString::from("--cf"),
            Some(s) if s.starts_with("-cf=") => OsString::from(format!("-{s}")),
            _ => a,
        })
        .collect()
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let cli = match Cli::try_parse_from(normalize_args(args)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let out = output_path(&cli.command).map(Path::to_path_buf);
    match execute(cli.command) {
        Ok((text, pass)) => match emit(&text, out.as_deref()) {
            Ok(()) => i32::from(!pass),
            Err(e) => diagnose(&Failure::Io(e.to_string())),
        },
        Err(f) => diagnose(&f),
    }
}

fn diagnose(f: &Failure) -> i32 {
    let (kind, message, code) = match f {
        Failure::Compute(e) => (e.kind(), e.to_string(), 1),
        Failure::Io(m) => ("io", m.clone(), 1),
        Failure::Usage(m) => ("usage", m.clone(), 2),
    };
    eprint!("{}", to_json(&json!({ "error": kind, "message": message })));
    code
}

fn output_path(cmd: &Command) -> Option<&Path> {
    match cmd {
        Command::Cf(a) => a.out.as_deref(),
        Command::Sigma(a) => a.out.as_deref(),
        Command::Spectrum(a) | Command::Gaps(a) => a.out.as_deref(),
        Command::Sums(a) => a.out.as_deref(),
        Command::Recursion(a) => a.out.as_deref(),
        Command::Verify(a) => a.out.as_deref(),
        Command::Butterfly(a) => a.out.as_deref(),
    }
}

/// Writes to stdout, or to `path` through a temporary file and a rename.
fn emit(text: &str, path: Option<&Path>) -> std::io::Result<()> {
    match path {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
        Some(path) => {
            let mut tmp = path.as_os_str().to_owned();
            tmp.push(".partial");
            fs::write(&tmp, text)?;
            fs::rename(&tmp, path)
        }
    }
}

fn execute(cmd: Command) -> Outcome {
    match cmd {
        Command::Cf(a) => cf_command(&a),
        Command::Sigma(a) => sigma_command(&a),
        Command::Spectrum(a) => spectrum_command(&a, true),
        Command::Gaps(a) => spectrum_command(&a, false),
        Command::Sums(a) => sums_command(&a),
        Command::Recursion(a) => recursion_command(&a),
        Command::Verify(a) => verify_command(&a),
        Command::Butterfly(a) => butterfly_command(&a),
    }
}

fn frequency_or_cf(p: Option<u64>, q: Option<u64>, cf: Option<&ContinuedFraction>) -> Result<ContinuedFraction, Failure> {
    match (p, q, cf) {
        (Some(p), Some(q), None) => Ok(expand(ReducedFraction::new(p, q)?)?),
        (None, None, Some(cf)) => Ok(cf.clone()),
        _ => Err(Failure::Usage("give either -p and -q, or -cf".into())),
    }
}

fn cf_command(a: &FrequencyArgs) -> Outcome {
    let cf = frequency_or_cf(a.p, a.q, a.cf.as_ref())?;
    let tails = tails(&cf)?;
    let body = json!({
        "cf": cf,
        "value": cf.value()?,
        "convergents": convergents(&cf)?,
        "tails": tails,
        "tail_product": tails.product()?,
        "parity": parity_check(&cf),
        "growth": growth_check(&cf, a.kappa, Constants::new().c3)?,
    });
    Ok((to_json(&body), true))
}

fn sigma_command(a: &SigmaArgs) -> Outcome {
    let d = Discriminant::new(a.p, a.q)?;
    let slope = if a.q % 2 == 1 { Some(sigma_prime0(a.p, a.q)?) } else { None };
    let body = json!({
        "p": a.p,
        "q": a.q,
        "energy": a.energy,
        "sigma": d.eval(a.energy),
        "determinant": d.det_recurrence(a.energy),
        "consistency": consistency_of(&d, a.energy),
        "sigma_prime0": slope,
    });
    Ok((to_json(&body), true))
}

fn spectrum_command(a: &TableArgs, with_bands: bool) -> Outcome {
    let bs = extract(a.p, a.q)?;
    let text = match (a.format, with_bands) {
        (Format::Csv, true) => format!("{}\n{}", bands_csv(&bs), gaps_csv(&bs)),
        (Format::Csv, false) => gaps_csv(&bs),
        (Format::Json, true) => to_json(&bs),
        (Format::Json, false) => to_json(&json!({ "p": bs.p, "q": bs.q, "s": bs.s, "gaps": bs.gaps })),
        (Format::Svg, _) => return Err(Failure::Usage("svg output is only available for butterfly".into())),
    };
    Ok((text, true))
}

#[derive(Serialize)]
struct KernelRow {
    ell: u64,
    closed: f64,
    brute: f64,
}

fn sums_command(a: &SumsArgs) -> Outcome {
    let ctx = SumContext::new(a.p, a.q, a.k)?;
    let table = (1..a.q)
        .map(|ell| Ok(KernelRow { ell, closed: f_closed(ell, &ctx)?, brute: f_brute(ell, &ctx)? }))
        .collect::<Result<Vec<_>, Error>>()?;
    let cf = expand(ReducedFraction::new(a.p, a.q)?)?;
    let admissible = parity_check(&cf);
    let bound = if admissible { Some(sum_bound_check(&cf, a.k)?) } else { None };
    let direct = l_direct(&ctx)?;
    let formula = l_formula(&ctx)?;
    let weighted = s_k(&ctx);
    let body = json!({
        "p": a.p,
        "q": a.q,
        "k": a.k,
        "s": ctx.s(),
        "kernel": table,
        "kernel_total": f_total(&ctx),
        "weighted_sum": weighted,
        "digamma_weighted_sum": digamma_weighted_sum(&ctx)?,
        "log_term_direct": direct,
        "log_term_formula": formula,
        "log_term_discrepancy": (direct - formula).abs(),
        "parity_admissible": admissible,
        "sum_bound": sum_bound(a.q),
        "sum_bound_slack": sum_bound(a.q) - weighted.abs(),
        "sum_bound_check": bound,
    });
    Ok((to_json(&body), true))
}

fn recursion_command(a: &RecursionArgs) -> Outcome {
    let cfg = QuadratureConfig { tol: a.tol, ..QuadratureConfig::default() };
    let check = recursion_check(&a.cf, a.k, &cfg)?;
    Ok((to_json(&check), true))
}

#[derive(Serialize)]
struct TheoremFourLevel {
    n: usize,
    containment: ContainmentReport,
    gap_inheritance: GapInheritanceReport,
}

fn suite_report(suite: SuiteArg, p: u64, q: u64) -> Result<VerificationReport, Error> {
    match suite {
        SuiteArg::All => check_all(p, q),
        SuiteArg::Lemma1 => check_lemma1(p, q),
        SuiteArg::Lemma2 => check_lemma2(p, q),
        SuiteArg::Thm3 => check_theorem3(p, q),
        SuiteArg::Thm4 => unreachable!("handled separately"),
    }
}

fn verify_command(a: &VerifyArgs) -> Outcome {
    if a.suite == SuiteArg::Thm4 {
        let cf = frequency_or_cf(a.p, a.q, a.cf.as_ref())?;
        let c4 = Constants::new().c4;
        let levels = (1..cf.len())
            .map(|n| {
                Ok(TheoremFourLevel {
                    n,
                    containment: check_containment(&cf, n)?,
                    gap_inheritance: check_gap_inheritance(&cf, n, a.kappa, c4)?,
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        // reporter only: nothing here is asserted
        let body = json!({ "suite": a.suite, "cf": cf, "pass": true, "levels": levels });
        return Ok((to_json(&body), true));
    }
    let fractions: Vec<ReducedFraction> = match a.qmax {
        Some(qmax) if a.p.is_none() && a.q.is_none() && a.cf.is_none() => parity_admissible_fractions(qmax),
        Some(_) => return Err(Failure::Usage("--qmax excludes -p, -q and -cf".into())),
        None => vec![frequency_or_cf(a.p, a.q, a.cf.as_ref())?.value()?],
    };
    let reports = in_pool(a.jobs, || {
        fractions.par_iter().map(|f| suite_report(a.suite, f.num(), f.den())).collect::<Result<Vec<_>, Error>>()
    })??;
    let mut report = VerificationReport::default();
    for r in reports {
        report.extend(r);
    }
    report.sort();
    let pass = report.all_pass();
    let failures = report.failures().count();
    let body = json!({
        "suite": a.suite,
        "fractions": fractions.len(),
        "pass": pass,
        "failures": failures,
        "report": report,
    });
    Ok((to_json(&body), pass))
}

fn in_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Failure::Io(e.to_string()))?;
    Ok(pool.install(f))
}

fn butterfly_command(a: &ButterflyArgs) -> Outcome {
    if a.qmax == 0 {
        return Err(Failure::Usage("--qmax must be at least 1".into()));
    }
    let jobs: Vec<(u64, u64)> = (1..=a.qmax).flat_map(|q| numerators(q).map(move |p| (p, q))).collect();
    let rows = in_pool(a.jobs, || {
        jobs.par_iter().map(|&(p, q)| frequency_rows(p, q)).collect::<Result<Vec<_>, Error>>()
    })??;
    let rows: Vec<_> = rows.into_iter().flatten().collect();
    let text = match a.format {
        Format::Csv => butterfly_csv(&rows),
        Format::Json => to_json(&rows),
        Format::Svg => render_svg(&butterfly_csv(&rows)).map_err(Failure::Io)?,
    };
    Ok((text, true))
}
