use std::path::{Path, PathBuf};

use omori_hawkes::{fit_scaling, ScalingFit};
use serde::Serialize;

use super::{display, write_report, Outcome};
use crate::cli::ScalingArgs;
use crate::config::ConfigFile;
use crate::error::{CliError, Result};
use crate::io;

#[derive(Debug, Clone, Serialize)]
pub struct ScalingConfig {
    pub points: Option<String>,
    pub fits: Vec<String>,
    pub output: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingResult {
    #[serde(flatten)]
    pub fit: ScalingFit,
    /// `(mean interevent time, lambda)` pairs that were fitted.
    pub points: Vec<(f64, f64)>,
}

/// `(mean_tau, lambda)` of a `fit` report.
pub fn point_from_fit(path: &Path) -> Result<(f64, f64)> {
    let v = io::read_json(path)?;
    let result = &v["result"];
    match (result["mean_tau"].as_f64(), result["params"]["lambda"].as_f64()) {
        (Some(x), Some(y)) => Ok((x, y)),
        _ => Err(CliError::Data(format!(
            "{}: not a fit report (missing result.mean_tau or result.params.lambda)",
            path.display()
        ))),
    }
}

pub fn run(args: ScalingArgs, file: &ConfigFile, out_dir: Option<PathBuf>) -> Result<Outcome> {
    let mut r = file.resolver();
    let points_path: Option<PathBuf> = r.get("points", args.points)?;
    let fits: Vec<PathBuf> = r.list("fits", args.fits)?;
    let output: Option<PathBuf> = r.get("output", args.output)?;
    let out_dir = r.out_dir(out_dir)?;
    r.finish()?;
    let output = output.unwrap_or_else(|| out_dir.join("scaling.json"));

    let points = match (&points_path, fits.is_empty()) {
        (Some(p), true) => io::read_points(p)?,
        (None, false) => fits.iter().map(|p| point_from_fit(p)).collect::<Result<Vec<_>>>()?,
        (Some(_), false) => {
            return Err(CliError::Config("give either points or fits, not both".into()))
        }
        (None, true) => return Err(CliError::Config("no input: give --points or --fits".into())),
    };
    let fit = fit_scaling(&points)?;
    let config = ScalingConfig {
        points: points_path.as_deref().map(display),
        fits: fits.iter().map(|p| display(p)).collect(),
        output: display(&output),
    };
    write_report(&output, "scaling", &config, &ScalingResult { fit, points })?;
    Ok(Outcome {
        written: vec![output],
        warnings: Vec::new(),
    })
}
