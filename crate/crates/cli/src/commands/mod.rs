//! Subcommand implementations and the pieces they share.

pub mod curves;
pub mod fit;
pub mod pipeline;
pub mod scaling;
pub mod simulate;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use omori_hawkes::{FitOptions, Likelihood, ParamBounds};
use serde::Serialize;

use crate::cli::FitFlags;
use crate::config::{Interval, Resolver};
use crate::error::{CliError, Result};
use crate::io;

pub const TOOL: &str = "omori-hawkes";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Envelope of every JSON output: provenance, resolved settings, result.
#[derive(Debug, Serialize)]
pub struct Report<'a, C, R> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub config: &'a C,
    pub result: &'a R,
}

pub fn write_report<C: Serialize, R: Serialize>(
    path: &Path,
    command: &str,
    config: &C,
    result: &R,
) -> Result<()> {
    io::write_json(
        path,
        &Report {
            tool: TOOL,
            version: VERSION,
            command,
            config,
            result,
        },
    )
}

/// Files written and warnings raised by a successful command.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Outcome {
    pub written: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Prefixes the message of `e` with `context`, keeping its class.
pub(crate) fn context(e: impl Into<CliError>, ctx: &str) -> CliError {
    match e.into() {
        CliError::Config(m) => CliError::Config(format!("{ctx}: {m}")),
        CliError::Data(m) => CliError::Data(format!("{ctx}: {m}")),
        CliError::Numeric(m) => CliError::Numeric(format!("{ctx}: {m}")),
        io @ CliError::Io { .. } => io,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Thinning,
    Branching,
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "thinning" => Ok(Algorithm::Thinning),
            "branching" => Ok(Algorithm::Branching),
            _ => Err(format!("unknown algorithm `{s}` (expected thinning or branching)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LikelihoodChoice {
    Auto,
    Literal,
    Renormalized,
    Daily,
}

impl FromStr for LikelihoodChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(LikelihoodChoice::Auto),
            "literal" => Ok(LikelihoodChoice::Literal),
            "renormalized" => Ok(LikelihoodChoice::Renormalized),
            "daily" | "daily-binned" | "daily_binned" => Ok(LikelihoodChoice::Daily),
            _ => Err(format!(
                "unknown likelihood `{s}` (expected auto, literal, renormalized or daily)"
            )),
        }
    }
}

impl fmt::Display for LikelihoodChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LikelihoodChoice::Auto => "auto",
            LikelihoodChoice::Literal => "literal",
            LikelihoodChoice::Renormalized => "renormalized",
            LikelihoodChoice::Daily => "daily",
        };
        f.write_str(s)
    }
}

impl LikelihoodChoice {
    /// `Auto` becomes the daily-binned likelihood when every duration is a
    /// whole number, the renormalized one otherwise.
    pub fn resolve<'a>(self, samples: impl IntoIterator<Item = &'a [f64]>) -> Likelihood {
        match self {
            LikelihoodChoice::Literal => Likelihood::Literal,
            LikelihoodChoice::Renormalized => Likelihood::Renormalized,
            LikelihoodChoice::Daily => Likelihood::DailyBinned,
            LikelihoodChoice::Auto => {
                let integral = samples
                    .into_iter()
                    .flat_map(|s| s.iter())
                    .all(|t| t.fract() == 0.0);
                if integral {
                    Likelihood::DailyBinned
                } else {
                    Likelihood::Renormalized
                }
            }
        }
    }
}

/// Resolved optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitSettings {
    pub likelihood: LikelihoodChoice,
    pub starts: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub bounds: ParamBounds,
    pub pooled: bool,
}

impl Default for FitSettings {
    fn default() -> Self {
        let o = FitOptions::default();
        FitSettings {
            likelihood: LikelihoodChoice::Auto,
            starts: o.starts,
            seed: o.seed,
            tolerance: o.tolerance,
            max_iterations: o.max_iterations,
            bounds: o.bounds,
            pooled: false,
        }
    }
}

impl FitSettings {
    pub fn resolve(r: &mut Resolver<'_>, f: FitFlags) -> Result<Self> {
        let d = FitSettings::default();
        let mut bounds = d.bounds;
        let mut interval = |key: &str, flag: Option<Interval>, slot: &mut [f64; 2]| -> Result<()> {
            if let Some(Interval(v)) = r.get(key, flag)? {
                *slot = v;
            }
            Ok(())
        };
        interval("n-bounds", f.n_bounds, &mut bounds.n)?;
        interval("theta-bounds", f.theta_bounds, &mut bounds.theta)?;
        interval("lambda-bounds", f.lambda_bounds, &mut bounds.lambda)?;
        interval("t0theta-bounds", f.t0theta_bounds, &mut bounds.t0theta)?;
        bounds.validate().map_err(|e| context(e, "fit bounds"))?;
        let s = FitSettings {
            likelihood: r.get_or("likelihood", f.likelihood, d.likelihood)?,
            starts: r.get_or("starts", f.starts, d.starts)?,
            seed: r.get_or("seed", f.seed, d.seed)?,
            tolerance: r.get_or("tolerance", f.tolerance, d.tolerance)?,
            max_iterations: r.get_or("max-iterations", f.max_iterations, d.max_iterations)?,
            bounds,
            pooled: r.switch("pooled", f.pooled)?,
        };
        if s.starts == 0 {
            return Err(CliError::Config("starts must be >= 1".into()));
        }
        if !(s.tolerance.is_finite() && s.tolerance > 0.0) {
            return Err(CliError::Config(format!("tolerance must be > 0, got {}", s.tolerance)));
        }
        Ok(s)
    }

    pub fn options(&self, likelihood: Likelihood) -> FitOptions {
        FitOptions {
            bounds: self.bounds,
            starts: self.starts,
            seed: self.seed,
            likelihood,
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            standard_errors: true,
        }
    }
}

pub(crate) fn display(p: &Path) -> String {
    p.display().to_string()
}

pub(crate) fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{name} must be finite and > 0, got {v}")))
    }
}
