//! Command-line front end. [`run`] returns the process exit code.
//!
//! Exit codes: 0 success, 1 failed run or soundness violation, 2 usage or
//! parse error, 3 enumeration cap exceeded.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::{a_u_min, A_U_MAX};
use crate::cnf::{parse_dimacs, Formula};
use crate::counter::{approx_count, Mode, RunConfig, RunMeta};
use crate::error::Error;
use crate::optimize::{
    conventional_parameters, landscape, optimal_parameters, write_landscape_csv, LandscapeGrid, OptimalParams,
};
use crate::verify::{
    census, exhaustive_suite, invalid_point, monte_carlo_failure, reduced_grid, write_report, VerifyRow,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "flexcount", version, about = "Approximate model counting with optimized, provably sound parameters")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(clap::Args, Debug, Clone, Copy)]
pub struct Tolerance {
    /// Multiplicative tolerance ε > 0.
    #[arg(long, default_value_t = 0.8)]
    pub epsilon: f64,
    /// Failure probability δ in (0, 1].
    #[arg(long, default_value_t = 0.001)]
    pub delta: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeArg {
    Flexmc,
    Approxmc6,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Flexmc => Mode::FlexMc,
            ModeArg::Approxmc6 => Mode::ApproxMc6,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Plain,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the counter parameters for (ε, δ).
    Optimize {
        #[command(flatten)]
        tol: Tolerance,
        #[arg(long, value_enum, default_value_t = ModeArg::Flexmc)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Estimate the projected model count of a DIMACS CNF file.
    Count {
        input: PathBuf,
        #[command(flatten)]
        tol: Tolerance,
        #[arg(long, value_enum, default_value_t = ModeArg::Flexmc)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Print the real-valued estimate instead of the nearest integer.
        #[arg(long)]
        raw: bool,
        /// Add wall-clock runtime to the meta block.
        #[arg(long)]
        timing: bool,
    },
    /// Write the reduced (thresh, a_U) surface as CSV.
    Landscape {
        #[command(flatten)]
        tol: Tolerance,
        #[arg(long, default_value_t = 2)]
        grid_thresh_lo: u64,
        #[arg(long, default_value_t = 400)]
        grid_thresh_hi: u64,
        /// Defaults to 1/(1+ε).
        #[arg(long)]
        grid_a_lo: Option<f64>,
        /// Defaults to just below 1.
        #[arg(long)]
        grid_a_hi: Option<f64>,
        #[arg(long, default_value_t = 200)]
        grid_steps: usize,
    },
    /// Check the failure bounds exhaustively on small formulas and by sampling.
    Verify {
        /// Core runs per Monte-Carlo row.
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_invalid: bool,
    },
}

/// Record printed by `optimize`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamRecord {
    pub mode: &'static str,
    pub epsilon: f64,
    pub delta: f64,
    pub thresh: u64,
    pub rnd: f64,
    pub t: u64,
    pub a_u: f64,
    pub p_l: f64,
    pub p_u: f64,
    pub obj: f64,
    pub bound_source: crate::optimize::BoundSource,
}

impl ParamRecord {
    fn new(mode: ModeArg, p: &OptimalParams) -> Self {
        Self {
            mode: match mode {
                ModeArg::Flexmc => "flexmc",
                ModeArg::Approxmc6 => "approxmc6",
            },
            epsilon: p.eps,
            delta: p.delta,
            thresh: p.thresh_star,
            rnd: p.rnd_star,
            t: p.t_star,
            a_u: p.a_u_star,
            p_l: p.p_l,
            p_u: p.p_u,
            obj: p.obj,
            bound_source: p.bound_source,
        }
    }
}

/// Meta block printed by `count` after the `s mc` line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountRecord {
    pub estimate: f64,
    #[serde(flatten)]
    pub meta: RunMeta,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse(_) => EXIT_USAGE,
            Error::EnumerationCap { .. } => EXIT_CAP,
            _ => EXIT_FAILURE,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self { code: EXIT_FAILURE, message: e.to_string() }
    }
}

fn check_tolerance(tol: Tolerance) -> Result<(), Failure> {
    if !(tol.epsilon > 0.0 && tol.epsilon.is_finite()) {
        return Err(Failure::usage(format!("--epsilon must be positive, got {}", tol.epsilon)));
    }
    if !(tol.delta > 0.0 && tol.delta <= 1.0) {
        return Err(Failure::usage(format!("--delta must lie in (0, 1], got {}", tol.delta)));
    }
    Ok(())
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    match cmd {
        Command::Optimize { tol, mode, format } => cmd_optimize(tol, mode, format, out),
        Command::Count { input, tol, mode, seed, raw, timing } => cmd_count(&input, tol, mode, seed, raw, timing, out),
        Command::Landscape { tol, grid_thresh_lo, grid_thresh_hi, grid_a_lo, grid_a_hi, grid_steps } => {
            check_tolerance(tol)?;
            let grid = LandscapeGrid {
                thresh_lo: grid_thresh_lo,
                thresh_hi: grid_thresh_hi,
                a_u_lo: grid_a_lo.unwrap_or_else(|| a_u_min(tol.epsilon)),
                a_u_hi: grid_a_hi.unwrap_or(A_U_MAX),
                a_u_steps: grid_steps,
            };
            cmd_landscape(tol, &grid, out)
        }
        Command::Verify { trials, seed, inject_invalid } => cmd_verify(trials, seed, inject_invalid, out),
    }
}

pub fn parameters_for(tol: Tolerance, mode: ModeArg) -> crate::Result<OptimalParams> {
    match mode {
        ModeArg::Flexmc => optimal_parameters(tol.epsilon, tol.delta),
        ModeArg::Approxmc6 => conventional_parameters(tol.epsilon, tol.delta),
    }
}

fn cmd_optimize(tol: Tolerance, mode: ModeArg, format: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    check_tolerance(tol)?;
    let rec = ParamRecord::new(mode, &parameters_for(tol, mode)?);
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rec)
                .map_err(|e| Failure { code: EXIT_FAILURE, message: e.to_string() })?;
            writeln!(out)?;
        }
        Format::Plain => {
            writeln!(out, "mode {}", rec.mode)?;
            writeln!(out, "thresh {}", rec.thresh)?;
            writeln!(out, "rnd {}", rec.rnd)?;
            writeln!(out, "t {}", rec.t)?;
            writeln!(out, "a_u {}", rec.a_u)?;
            writeln!(out, "p_l {}", rec.p_l)?;
            writeln!(out, "p_u {}", rec.p_u)?;
            writeln!(out, "obj {}", rec.obj)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_count(
    input: &PathBuf,
    tol: Tolerance,
    mode: ModeArg,
    seed: u64,
    raw: bool,
    timing: bool,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    check_tolerance(tol)?;
    let text =
        std::fs::read_to_string(input).map_err(|e| Failure::usage(format!("cannot read {}: {e}", input.display())))?;
    let formula: Formula = parse_dimacs(&text).map_err(Error::from)?;
    let start = Instant::now();
    let (estimate, meta) = approx_count(&formula, &RunConfig::new(tol.epsilon, tol.delta, mode.into(), seed))?;
    let elapsed = start.elapsed();
    if raw {
        writeln!(out, "s mc {estimate}")?;
    } else {
        writeln!(out, "s mc {:.0}", estimate.round())?;
    }
    let rec = CountRecord { estimate, meta, runtime_ms: timing.then_some(elapsed.as_secs_f64() * 1e3) };
    serde_json::to_writer_pretty(&mut *out, &rec)
        .map_err(|e| Failure { code: EXIT_FAILURE, message: e.to_string() })?;
    writeln!(out)?;
    Ok(EXIT_OK)
}

fn cmd_landscape(tol: Tolerance, grid: &LandscapeGrid, out: &mut dyn Write) -> Result<i32, Failure> {
    let rows = landscape(tol.epsilon, tol.delta, grid).map_err(|e| match e {
        Error::Contract(m) => Failure::usage(m),
        e => e.into(),
    })?;
    write_landscape_csv(&rows, out)?;
    Ok(EXIT_OK)
}

/// The 10-variable formula with two unit clauses, `|sol| = 256`.
pub fn sampling_formula() -> Formula {
    Formula::new(10, vec![vec![1], vec![-2]], None).expect("well-formed")
}

/// Monte-Carlo rows at the optimized parameters for `ε ∈ {0.8, 0.4}`.
///
/// A row is sound when each observed rate is within three binomial
/// standard deviations above its bound.
pub fn monte_carlo_rows(trials: u64, seed: u64) -> crate::Result<Vec<VerifyRow>> {
    let f = sampling_formula();
    let mut rows = Vec::new();
    for eps in [0.8, 0.4] {
        let p = optimal_parameters(eps, 0.001)?;
        let (rate_l, rate_u) = monte_carlo_failure(&f, p.thresh_star, p.rnd_star, eps, trials, seed)?;
        let slack = |b: f64| b + 3.0 * (b * (1.0 - b) / trials as f64).sqrt();
        rows.push(VerifyRow {
            formula: format!("mc{trials}:n10[1;-2]"),
            thresh: p.thresh_star,
            rnd: p.rnd_star,
            eps,
            pr_l: rate_l.to_string(),
            pr_u: rate_u.to_string(),
            p_l_bound: p.p_l,
            p_u_bound: p.p_u,
            sound: rate_l <= slack(p.p_l) && rate_u <= slack(p.p_u),
        });
    }
    Ok(rows)
}

fn cmd_verify(trials: u64, seed: u64, inject_invalid: bool, out: &mut dyn Write) -> Result<i32, Failure> {
    if trials == 0 {
        return Err(Failure::usage("--trials must be at least 1"));
    }
    let mut grid = reduced_grid();
    if inject_invalid {
        grid.push(invalid_point());
    }
    let mut rows = exhaustive_suite(&census(), &grid)?;
    rows.extend(monte_carlo_rows(trials, seed)?);
    write_report(&rows, &mut *out)?;
    Ok(if rows.iter().all(|r| r.sound) { EXIT_OK } else { EXIT_FAILURE })
}
