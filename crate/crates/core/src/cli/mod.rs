//! Command-line front end.

mod commands;
mod config;

pub use config::{BasisFamily, RunConfig, SampleMethod};

use crate::error::Result;
use crate::generative::TorusPrior;
use crate::moments::Shrinkage;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

#[derive(Debug, Parser)]
#[command(name = "oism", version, about = "Operator-informed score matching")]
pub struct Cli {
    /// JSON run configuration (or a provenance file from an earlier run).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for batch work.
    #[arg(long, global = true, env = "OISM_WORKERS")]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a synthetic data set.
    GenData(GenDataArgs),
    /// Fit a score model to a CSV data set.
    Fit(FitArgs),
    /// Draw samples from a fitted model.
    Sample(SampleArgs),
    /// Evaluate model log-densities on a grid.
    Density(DensityArgs),
    /// Score-matching loss versus basis size, with and without shrinkage.
    LossStudy(LossStudyArgs),
    /// Print the enumeration of a basis.
    EigenReport(EigenReportArgs),
}

#[derive(Debug, Args)]
pub struct GenDataArgs {
    /// bart-simpson, standard-normal, pinwheel, checkerboard, two-moons, rings, swiss-roll
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Dimension for standard-normal.
    #[arg(long)]
    pub dimension: Option<usize>,
}

#[derive(Debug, Args, Default)]
pub struct BasisArgs {
    #[arg(long, value_enum)]
    pub basis: Option<BasisFamily>,
    #[arg(long)]
    pub max_freq: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    pub eigenvalue_floor: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub extended_floor: Option<f64>,
    #[arg(long)]
    pub order: Option<u32>,
    #[arg(long)]
    pub extended_order: Option<u32>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV data set with a header line.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[command(flatten)]
    pub basis: BasisArgs,
    #[arg(long, value_parser = parse_shrinkage)]
    pub shrinkage: Option<Shrinkage>,
    #[arg(long)]
    pub shrink_extended: Option<bool>,
    #[arg(long)]
    pub grid_size: Option<usize>,
    /// VE:<sigma_min>:<sigma_max> or VP:<beta0>:<beta1>.
    #[arg(long, value_parser = parse_schedule)]
    pub schedule: Option<crate::process::Schedule>,
    /// Affinely rescale the data into the torus before fitting.
    #[arg(long)]
    pub map_to_torus: bool,
    #[arg(long)]
    pub margin: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub method: Option<SampleMethod>,
    #[arg(long)]
    pub sde_steps: Option<usize>,
    #[arg(long, value_parser = parse_prior)]
    pub torus_prior: Option<TorusPrior>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Grid nodes per coordinate.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Grid bounds for OU models.
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct LossStudyArgs {
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub sizes: Option<Vec<u32>>,
    #[arg(long)]
    pub replications: Option<usize>,
    #[arg(long)]
    pub n_data: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
    #[arg(long)]
    pub shrink_extended: Option<bool>,
}

#[derive(Debug, Args)]
pub struct EigenReportArgs {
    #[command(flatten)]
    pub basis: BasisArgs,
    #[arg(long)]
    pub dimension: Option<usize>,
}

fn parse_shrinkage(s: &str) -> std::result::Result<Shrinkage, String> {
    match s {
        "none" => Ok(Shrinkage::None),
        "modulation" => Ok(Shrinkage::Modulation),
        _ => Err(format!("expected none or modulation, got {s:?}")),
    }
}

fn parse_prior(s: &str) -> std::result::Result<TorusPrior, String> {
    match s {
        "uniform" => Ok(TorusPrior::Uniform),
        "wrapped-gaussian" | "wrapped_gaussian" => Ok(TorusPrior::WrappedGaussian),
        _ => Err(format!("expected uniform or wrapped-gaussian, got {s:?}")),
    }
}

fn parse_schedule(s: &str) -> std::result::Result<crate::process::Schedule, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = |a: &str, b: &str| -> std::result::Result<(f64, f64), String> {
        Ok((
            a.parse().map_err(|_| format!("bad number {a:?}"))?,
            b.parse().map_err(|_| format!("bad number {b:?}"))?,
        ))
    };
    match parts.as_slice() {
        [k, a, b] if k.eq_ignore_ascii_case("ve") => {
            let (a, b) = nums(a, b)?;
            Ok(crate::process::Schedule::ve(a, b))
        }
        [k, a, b] if k.eq_ignore_ascii_case("vp") => {
            let (a, b) = nums(a, b)?;
            Ok(crate::process::Schedule::vp(a, b))
        }
        _ => Err(format!("expected VE:<min>:<max> or VP:<b0>:<b1>, got {s:?}")),
    }
}

/// Parse arguments, run the command and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = Some(o.clone());
    }
    if let Some(w) = cli.workers {
        cfg.workers = Some(w);
    }
    commands::merge(&mut cfg, &cli.command);
    cfg.validate()?;
    if let Some(w) = cfg.workers {
        crate::par::configure_workers(w);
    }
    commands::dispatch(&cli.command, &cfg)
}
