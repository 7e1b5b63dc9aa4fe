use std::path::PathBuf;

use omori_hawkes::calibrate::MIN_SCALING_POINTS;
use omori_hawkes::{fit_scaling, IntereventLawParams, ScalingFit};
use serde::Serialize;

use super::curves::{curve_rows, write_curves, DEFAULT_BINS_PER_DECADE};
use super::fit::{fit_assets, Asset, PricedAsset};
use super::{display, positive, write_report, FitSettings, Outcome};
use crate::cli::PipelineArgs;
use crate::config::ConfigFile;
use crate::error::{CliError, Result};

pub const DEFAULT_TARGETS: [f64; 5] = [2.0, 5.0, 10.0, 30.0, 70.0];

#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub prices: Vec<PathBuf>,
    pub targets: Vec<f64>,
    pub bins_per_decade: usize,
    #[serde(flatten)]
    pub fit: FitSettings,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetSummary {
    pub target_mean: f64,
    pub params: IntereventLawParams,
    pub converged: bool,
    /// Model density finite and positive at every curve point.
    pub model_positive: bool,
    pub fit_file: String,
    pub curves_file: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineOutcome {
    pub targets: Vec<TargetSummary>,
    pub scaling: Option<ScalingFit>,
    /// Why the scaling fit is missing, when it is.
    pub scaling_error: Option<String>,
    #[serde(skip)]
    pub written: Vec<PathBuf>,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

fn file_stem(target: f64) -> String {
    format!("tau{target}")
}

/// Runs fit and curves for every target mean and, given enough targets, the
/// scaling fit. Non-convergence is recorded, not raised.
pub fn execute(cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    if cfg.prices.is_empty() {
        return Err(CliError::Config("no input: give --prices".into()));
    }
    if cfg.targets.is_empty() {
        return Err(CliError::Config("no target means".into()));
    }
    for &t in &cfg.targets {
        positive("target mean", t)?;
    }
    let priced = cfg
        .prices
        .iter()
        .map(|p| PricedAsset::load(p))
        .collect::<Result<Vec<_>>>()?;

    let mut out = PipelineOutcome {
        targets: Vec::new(),
        scaling: None,
        scaling_error: None,
        written: Vec::new(),
        warnings: Vec::new(),
    };
    for &target in &cfg.targets {
        let assets = priced
            .iter()
            .map(|a| a.at_target(target))
            .collect::<Result<Vec<Asset>>>()?;
        let fit = fit_assets(&assets, &cfg.fit, target)?;
        let stem = file_stem(target);
        let fit_path = cfg.out_dir.join(format!("fit_{stem}.json"));
        let curves_path = cfg.out_dir.join(format!("curves_{stem}.csv"));
        let per_target = serde_json::json!({
            "target_mean": target,
            "prices": cfg.prices,
            "bins_per_decade": cfg.bins_per_decade,
            "fit": cfg.fit,
        });
        write_report(&fit_path, "fit", &per_target, &fit)?;

        let pooled: Vec<f64> = assets.iter().flat_map(|a| a.interevents.iter().copied()).collect();
        let (rows, warning) = curve_rows(&fit.params, &pooled, cfg.bins_per_decade)?;
        write_curves(&curves_path, &rows)?;
        out.warnings.extend(warning.map(|w| format!("target {target}: {w}")));
        if !fit.converged {
            out.warnings.push(format!("target {target}: fit did not converge"));
        }
        out.targets.push(TargetSummary {
            target_mean: target,
            params: fit.params,
            converged: fit.converged,
            model_positive: rows.iter().all(|r| r.model.is_finite() && r.model > 0.0),
            fit_file: display(&fit_path),
            curves_file: display(&curves_path),
        });
        out.written.push(fit_path);
        out.written.push(curves_path);
    }

    if out.targets.len() >= MIN_SCALING_POINTS {
        let points: Vec<(f64, f64)> = out
            .targets
            .iter()
            .map(|t| (t.target_mean, t.params.lambda))
            .collect();
        match fit_scaling(&points) {
            Ok(s) => out.scaling = Some(s),
            Err(e) => {
                out.warnings.push(format!("scaling fit failed: {e}"));
                out.scaling_error = Some(e.to_string());
            }
        }
    } else {
        out.scaling_error = Some(format!(
            "{} target means; the scaling fit needs at least {MIN_SCALING_POINTS}",
            out.targets.len()
        ));
    }
    let summary_path = cfg.out_dir.join("pipeline.json");
    write_report(&summary_path, "pipeline", cfg, &out)?;
    out.written.push(summary_path);
    Ok(out)
}

pub fn run(args: PipelineArgs, file: &ConfigFile, out_dir: Option<PathBuf>) -> Result<Outcome> {
    let mut r = file.resolver();
    let prices: Vec<PathBuf> = r.list("prices", args.prices)?;
    let mut targets: Vec<f64> = r.list("targets", args.targets)?;
    if targets.is_empty() {
        targets = DEFAULT_TARGETS.to_vec();
    }
    let bins_per_decade = r.get_or("bins-per-decade", args.bins_per_decade, DEFAULT_BINS_PER_DECADE)?;
    let fit = FitSettings::resolve(&mut r, args.fit)?;
    let out_dir = r.out_dir(out_dir)?;
    r.finish()?;
    let cfg = PipelineConfig {
        prices,
        targets,
        bins_per_decade,
        fit,
        out_dir,
    };
    let out = execute(&cfg)?;
    let failed: Vec<String> = out
        .targets
        .iter()
        .filter(|t| !t.converged)
        .map(|t| t.target_mean.to_string())
        .collect();
    if !failed.is_empty() {
        return Err(CliError::Numeric(format!(
            "fits at target mean(s) {} did not converge; results written to {}",
            failed.join(", "),
            cfg.out_dir.display()
        )));
    }
    Ok(Outcome {
        written: out.written,
        warnings: out.warnings,
    })
}
