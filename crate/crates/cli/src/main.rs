//! `tds-mid`: designs, spectra, sweeps, RHP counts and simulations for
//! `y' + a0 y + a1 y(t-τ1) + a2 y(t-τ2) = 0`.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub const WORKERS_VAR: &str = "TDS_MID_WORKERS";

/// Failure classes, mapped to exit codes 2 and 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

pub fn numerical(e: impl std::fmt::Display) -> CliError {
    CliError::Numerical(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "tds-mid", version, args_override_self = true)]
#[command(about = "Multiplicity-induced dominancy designs for two-delay scalar equations")]
pub struct RunConfig {
    /// key=value file whose entries act as defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Coefficients placing a triple root at s0.
    Design(DesignArgs),
    /// Roots of the normalized function (or of a quasipolynomial file) in a rectangle.
    Spectrum(SpectrumArgs),
    /// Roots over a uniform λ grid, as CSV and optionally SVG.
    Sweep(SweepArgs),
    /// Right-half-plane zero count from imaginary-axis sign data.
    CountRhp(SourceArgs),
    /// Imaginary-axis roots of the normalized function.
    Clearance(LambdaArgs),
    /// Time-domain simulation of a design.
    Simulate(SimulateArgs),
    /// Full dominance audit of a design.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct DesignParams {
    #[arg(long, allow_hyphen_values = true)]
    pub tau1: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub tau2: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub s0: f64,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    #[command(flatten)]
    pub params: DesignParams,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Quasipolynomial in `delay; c0 c1 ...` lines.
    #[arg(long, value_name = "FILE")]
    pub qp_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    #[command(flatten)]
    pub source: Source,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub source: Source,
    /// re_min,re_max,im_min,im_max
    #[arg(long, allow_hyphen_values = true, default_value = commands::DEFAULT_RECT)]
    pub rect: String,
    #[arg(long, default_value_t = tds_mid::rootfinder::DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Number of λ values, endpoints included.
    #[arg(long, default_value_t = 21)]
    pub grid: usize,
    #[arg(long, allow_hyphen_values = true, default_value = commands::DEFAULT_RECT)]
    pub rect: String,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LambdaArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub params: DesignParams,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// History as polynomial coefficients in t, constant first.
    #[arg(long, allow_hyphen_values = true, default_value = "1")]
    pub history: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Print the fitted exponential rate.
    #[arg(long)]
    pub rate: bool,
    /// Trailing fraction of the trace used by the rate fit.
    #[arg(long, default_value_t = 0.5)]
    pub window: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub params: DesignParams,
    /// Scan rectangle in normalized coordinates.
    #[arg(long, allow_hyphen_values = true, default_value = commands::DEFAULT_RECT)]
    pub rect: String,
}

fn configure_workers() -> CliResult<()> {
    let Ok(raw) = std::env::var(WORKERS_VAR) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        usage(format!(
            "{WORKERS_VAR} must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(e.to_string()))
}

fn run(argv: Vec<String>) -> CliResult<()> {
    let argv = config::expand(argv)?;
    let cfg = match RunConfig::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    configure_workers()?;
    commands::dispatch(cfg.command)
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("error: {m}"),
                CliError::Numerical(m) => eprintln!("numerical failure: {m}"),
            }
            ExitCode::from(e.code())
        }
    }
}
