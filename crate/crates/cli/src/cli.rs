//! Command-line syntax. Every setting is optional here; the commands resolve
//! it against the config file and built-in defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::commands::{Algorithm, LikelihoodChoice};
use crate::config::Interval;

#[derive(Debug, Parser)]
#[command(name = "omori-hawkes", version, about = "Interevent times of loss exceedances under an Omori-kernel Hawkes model")]
pub struct Cli {
    /// Flat `key = value` config file; flags take precedence over it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory [default: $OMORI_HAWKES_OUT_DIR, else the working directory].
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate event times and write `events.csv` plus `simulate.json`.
    Simulate(SimulateArgs),
    /// Fit the interevent law to interevent files or to price files at a target mean.
    Fit(FitArgs),
    /// Empirical and model densities at log-spaced points, for plotting.
    Curves(CurvesArgs),
    /// Fit `lambda = a + b exp(-<tau> / tau0)` to (mean interevent time, rate) points.
    Scaling(ScalingArgs),
    /// Fit and curves for each target mean, then the scaling fit.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Branching ratio.
    #[arg(long)]
    pub n: Option<f64>,
    /// Omori exponent.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Kernel microscale in days.
    #[arg(long, conflicts_with = "t0theta")]
    pub t0: Option<f64>,
    /// Kernel scale given as t0^theta.
    #[arg(long)]
    pub t0theta: Option<f64>,
    /// Background rate, events/day.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Simulation horizon in days.
    #[arg(long)]
    pub horizon: Option<f64>,
    /// RNG seed; a fresh one is generated and recorded when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// `thinning` or `branching`.
    #[arg(long)]
    pub algorithm: Option<Algorithm>,
    /// Stop after this many events; required for n >= 1.
    #[arg(long)]
    pub cap: Option<usize>,
}

/// Optimizer settings shared by `fit` and `pipeline`.
#[derive(Debug, Args)]
pub struct FitFlags {
    /// `auto`, `literal`, `renormalized` or `daily`. `auto` picks `daily` when
    /// every duration is a whole number of days.
    #[arg(long)]
    pub likelihood: Option<LikelihoodChoice>,
    /// Optimizer starts per fit.
    #[arg(long)]
    pub starts: Option<usize>,
    /// Seed for the start points.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simplex size at which a start has converged.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long, value_name = "LO,HI")]
    pub n_bounds: Option<Interval>,
    #[arg(long, value_name = "LO,HI")]
    pub theta_bounds: Option<Interval>,
    #[arg(long, value_name = "LO,HI")]
    pub lambda_bounds: Option<Interval>,
    #[arg(long, value_name = "LO,HI")]
    pub t0theta_bounds: Option<Interval>,
    /// Also fit all assets' durations as one sample and report that fit.
    #[arg(long)]
    pub pooled: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Interevent files (column `tau_days`), one per asset.
    #[arg(long, num_args = 1.., value_name = "FILE")]
    pub interevents: Vec<PathBuf>,
    /// Price files (columns `date,close`), one per asset.
    #[arg(long, num_args = 1.., value_name = "FILE", conflicts_with = "interevents")]
    pub prices: Vec<PathBuf>,
    /// Target mean interevent time in trading days, with --prices.
    #[arg(long)]
    pub target_mean: Option<f64>,
    #[command(flatten)]
    pub fit: FitFlags,
    /// Report path [default: <out-dir>/fit.json].
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    /// Parameter JSON: a `fit` report or `{n, theta, lambda, t0theta}`.
    #[arg(long, value_name = "FILE")]
    pub params: Option<PathBuf>,
    /// Empirical interevent files; their durations are pooled.
    #[arg(long, num_args = 1.., value_name = "FILE")]
    pub interevents: Vec<PathBuf>,
    #[arg(long)]
    pub bins_per_decade: Option<usize>,
    /// Output path [default: <out-dir>/curves.csv].
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScalingArgs {
    /// Points file with columns `mean_tau,lambda`.
    #[arg(long, value_name = "FILE")]
    pub points: Option<PathBuf>,
    /// `fit` reports; each contributes its mean interevent time and rate.
    #[arg(long, num_args = 1.., value_name = "FILE", conflicts_with = "points")]
    pub fits: Vec<PathBuf>,
    /// Report path [default: <out-dir>/scaling.json].
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Price files (columns `date,close`), one per asset.
    #[arg(long, num_args = 1.., value_name = "FILE")]
    pub prices: Vec<PathBuf>,
    /// Target mean interevent times [default: 2,5,10,30,70].
    #[arg(long, value_delimiter = ',')]
    pub targets: Vec<f64>,
    #[arg(long)]
    pub bins_per_decade: Option<usize>,
    #[command(flatten)]
    pub fit: FitFlags,
}
