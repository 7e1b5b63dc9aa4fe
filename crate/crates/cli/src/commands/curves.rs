use std::path::{Path, PathBuf};

use omori_hawkes::{empirical_pdf, interevent_pdf, IntereventLawParams, KernelParams};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{display, Outcome};
use crate::cli::CurvesArgs;
use crate::config::ConfigFile;
use crate::error::{CliError, Result};
use crate::io::{self, CurveRow};

pub const DEFAULT_BINS_PER_DECADE: usize = 8;

/// Range of the model-only curve, in days.
const MODEL_ONLY_RANGE: (f64, f64) = (1.0, 500.0);

#[derive(Deserialize)]
struct FlatParams {
    n: f64,
    theta: f64,
    lambda: f64,
    t0theta: f64,
}

fn params_from_value(v: &Value) -> Option<IntereventLawParams> {
    if let Some(inner) = v.get("result").and_then(|r| r.get("params")) {
        return params_from_value(inner);
    }
    if let Ok(p) = serde_json::from_value::<IntereventLawParams>(v.clone()) {
        return Some(p);
    }
    serde_json::from_value::<FlatParams>(v.clone())
        .ok()
        .map(|f| IntereventLawParams {
            kernel: KernelParams {
                n: f.n,
                theta: f.theta,
                t0theta: f.t0theta,
            },
            lambda: f.lambda,
        })
}

/// Reads parameters from a `fit` report or a bare parameter object
/// (`{n, theta, lambda, t0theta}`) and checks their invariants.
pub fn load_params(path: &Path) -> Result<IntereventLawParams> {
    let v = io::read_json(path)?;
    let p = params_from_value(&v).ok_or_else(|| {
        CliError::Data(format!(
            "{}: no interevent-law parameters found",
            path.display()
        ))
    })?;
    p.validate()
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(p)
}

/// Curve rows at the empirical bin centers, or on a log grid over
/// `[1, 500]` days when there is no empirical sample. Returns a warning in
/// the latter case.
pub fn curve_rows(
    params: &IntereventLawParams,
    durations: &[f64],
    bins_per_decade: usize,
) -> Result<(Vec<CurveRow>, Option<String>)> {
    if bins_per_decade == 0 {
        return Err(CliError::Config("bins-per-decade must be >= 1".into()));
    }
    if durations.is_empty() {
        let (lo, hi) = MODEL_ONLY_RANGE;
        let steps = ((hi / lo).log10() * bins_per_decade as f64).ceil() as usize;
        let rows = (0..=steps)
            .map(|i| {
                let tau = lo * (hi / lo).powf(i as f64 / steps as f64);
                Ok(CurveRow {
                    tau,
                    empirical: None,
                    model: interevent_pdf(tau, params)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let warning = "empirical sample is empty; writing the model curve only".to_string();
        return Ok((rows, Some(warning)));
    }
    let e = empirical_pdf(durations, bins_per_decade)?;
    let rows = e
        .centers()
        .into_iter()
        .zip(&e.densities)
        .map(|(tau, &d)| {
            Ok(CurveRow {
                tau,
                empirical: Some(d),
                model: interevent_pdf(tau, params)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let warning = e
        .degenerate
        .then(|| "all durations are identical; the empirical density has a single bin".to_string());
    Ok((rows, warning))
}

pub fn write_curves(path: &Path, rows: &[CurveRow]) -> Result<()> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                io::fmt_f64(r.tau),
                r.empirical.map(io::fmt_f64).unwrap_or_default(),
                io::fmt_f64(r.model),
            ]
        })
        .collect();
    io::write_csv(path, &io::CURVES_HEADER, &rows)
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvesConfig {
    pub params: String,
    pub interevents: Vec<String>,
    pub bins_per_decade: usize,
    pub output: String,
}

pub fn run(args: CurvesArgs, file: &ConfigFile, out_dir: Option<PathBuf>) -> Result<Outcome> {
    let mut r = file.resolver();
    let params_path: PathBuf = r.require("params", args.params)?;
    let interevents: Vec<PathBuf> = r.list("interevents", args.interevents)?;
    let bins_per_decade = r.get_or("bins-per-decade", args.bins_per_decade, DEFAULT_BINS_PER_DECADE)?;
    let output: Option<PathBuf> = r.get("output", args.output)?;
    let out_dir = r.out_dir(out_dir)?;
    r.finish()?;
    let output = output.unwrap_or_else(|| out_dir.join("curves.csv"));

    let params = load_params(&params_path)?;
    let mut durations = Vec::new();
    for p in &interevents {
        durations.extend(io::read_interevents(p)?);
    }
    let (rows, warning) = curve_rows(&params, &durations, bins_per_decade)?;
    write_curves(&output, &rows)?;
    // The CSV has no room for provenance; record it alongside.
    let config = CurvesConfig {
        params: display(&params_path),
        interevents: interevents.iter().map(|p| display(p)).collect(),
        bins_per_decade,
        output: display(&output),
    };
    let sidecar = output.with_extension("json");
    super::write_report(&sidecar, "curves", &config, &params)?;
    Ok(Outcome {
        written: vec![output, sidecar],
        warnings: warning.into_iter().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_only_grid() {
        let p = IntereventLawParams::new(0.96, 0.29, 0.112, 0.32).unwrap();
        let (rows, warning) = curve_rows(&p, &[], 8).unwrap();
        assert!(warning.is_some());
        assert_eq!(rows.first().unwrap().tau, 1.0);
        assert!((rows.last().unwrap().tau - 500.0).abs() < 1e-9);
        assert!(rows.iter().all(|r| r.model.is_finite() && r.model > 0.0));
    }

    #[test]
    fn params_forms() {
        let flat = serde_json::json!({"n": 0.5, "theta": 0.3, "lambda": 0.2, "t0theta": 0.4});
        let nested = serde_json::json!({"result": {"params": {"kernel": {"n": 0.5, "theta": 0.3, "t0theta": 0.4}, "lambda": 0.2}}});
        assert_eq!(params_from_value(&flat), params_from_value(&nested));
        assert!(params_from_value(&serde_json::json!({"n": 1})).is_none());
    }
}
