use std::path::{Path, PathBuf};

use omori_hawkes::market::CleaningReport;
use omori_hawkes::{
    average_params, extract_exceedances, find_threshold, fit_mle, prices_to_returns,
    AveragedParams, Error as CoreError, FitResult, IntereventLawParams, Likelihood, ReturnSeries,
    ThresholdChoice,
};
use serde::{Deserialize, Serialize};

use super::{context, display, positive, write_report, FitSettings, Outcome};
use crate::cli::FitArgs;
use crate::config::ConfigFile;
use crate::error::{CliError, Result};
use crate::io;

/// One asset's durations and, for price input, how they were obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct Asset {
    pub source: String,
    pub threshold: Option<ThresholdChoice>,
    pub cleaning: Option<CleaningReport>,
    pub interevents: Vec<f64>,
}

pub fn interevent_asset(path: &Path) -> Result<Asset> {
    Ok(Asset {
        source: display(path),
        threshold: None,
        cleaning: None,
        interevents: io::read_interevents(path)?,
    })
}

/// Returns of one price file, read once and reused across target means.
#[derive(Debug, Clone, PartialEq)]
pub struct PricedAsset {
    pub source: String,
    pub returns: ReturnSeries,
    pub cleaning: CleaningReport,
}

impl PricedAsset {
    pub fn load(path: &Path) -> Result<Self> {
        let source = display(path);
        let rows = io::read_prices(path)?;
        let (returns, cleaning) = prices_to_returns(&rows).map_err(|e| context(e, &source))?;
        Ok(PricedAsset {
            source,
            returns,
            cleaning,
        })
    }

    /// Loss exceedances at the threshold matching `target_mean`.
    pub fn at_target(&self, target_mean: f64) -> Result<Asset> {
        let ctx = |e: CoreError| context(e, &self.source);
        let choice = find_threshold(&self.returns, target_mean).map_err(ctx)?;
        let events = extract_exceedances(&self.returns, choice.q).map_err(ctx)?;
        Ok(Asset {
            source: self.source.clone(),
            threshold: Some(choice),
            cleaning: Some(self.cleaning.clone()),
            interevents: events.interevents(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssetFit {
    pub source: String,
    pub threshold: Option<ThresholdChoice>,
    pub cleaning: Option<CleaningReport>,
    pub interevent_count: usize,
    pub fit: FitResult,
}

/// Which fit supplies the reported parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selected {
    Single,
    Average,
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    /// Target mean interevent time, or the sample mean for interevent input.
    pub mean_tau: f64,
    pub likelihood: Likelihood,
    pub selected: Selected,
    /// Parameters of the selected fit.
    pub params: IntereventLawParams,
    pub converged: bool,
    pub assets: Vec<AssetFit>,
    pub average: Option<AveragedParams>,
    pub pooled: Option<FitResult>,
}

/// A fit whose starts all failed to converge still reports its best point.
fn fit_or_best(sample: &[f64], opts: &omori_hawkes::FitOptions, source: &str) -> Result<FitResult> {
    match fit_mle(sample, opts) {
        Ok(f) => Ok(f),
        Err(CoreError::NotConverged { best: Some(best), .. }) => Ok(*best),
        Err(e) => Err(context(e, source)),
    }
}

/// Fits every asset (concurrently), then averages, and optionally fits the
/// pooled sample.
pub fn fit_assets(assets: &[Asset], settings: &FitSettings, mean_tau: f64) -> Result<FitOutcome> {
    if assets.is_empty() {
        return Err(CliError::Config("no input assets".into()));
    }
    let likelihood = settings
        .likelihood
        .resolve(assets.iter().map(|a| a.interevents.as_slice()));
    let opts = settings.options(likelihood);
    let fits: Vec<Result<FitResult>> = std::thread::scope(|s| {
        let handles: Vec<_> = assets
            .iter()
            .map(|a| s.spawn(move || fit_or_best(&a.interevents, &opts, &a.source)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("fit worker panicked"))
            .collect()
    });
    let mut asset_fits = Vec::with_capacity(assets.len());
    for (a, fit) in assets.iter().zip(fits) {
        asset_fits.push(AssetFit {
            source: a.source.clone(),
            threshold: a.threshold,
            cleaning: a.cleaning.clone(),
            interevent_count: a.interevents.len(),
            fit: fit?,
        });
    }

    let pooled = if settings.pooled {
        let all: Vec<f64> = assets.iter().flat_map(|a| a.interevents.iter().copied()).collect();
        Some(fit_or_best(&all, &opts, "pooled sample")?)
    } else {
        None
    };
    let average = if asset_fits.len() > 1 {
        let fits: Vec<FitResult> = asset_fits.iter().map(|a| a.fit.clone()).collect();
        average_params(&fits).ok()
    } else {
        None
    };

    let (selected, params, converged) = if let Some(p) = &pooled {
        (Selected::Pooled, p.params, p.converged)
    } else if asset_fits.len() == 1 {
        let f = &asset_fits[0].fit;
        (Selected::Single, f.params, f.converged)
    } else {
        match &average {
            Some(a) => (Selected::Average, a.params, true),
            // Nothing converged: report the plain mean of the best points.
            None => {
                let fits: Vec<FitResult> = asset_fits
                    .iter()
                    .map(|a| FitResult {
                        converged: true,
                        ..a.fit.clone()
                    })
                    .collect();
                (Selected::Average, average_params(&fits)?.params, false)
            }
        }
    };
    Ok(FitOutcome {
        mean_tau,
        likelihood,
        selected,
        params,
        converged,
        assets: asset_fits,
        average,
        pooled,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FitConfig {
    pub interevents: Vec<String>,
    pub prices: Vec<String>,
    pub target_mean: Option<f64>,
    #[serde(flatten)]
    pub settings: FitSettings,
    pub output: String,
}

pub fn run(args: FitArgs, file: &ConfigFile, out_dir: Option<PathBuf>) -> Result<Outcome> {
    let mut r = file.resolver();
    let interevents: Vec<PathBuf> = r.list("interevents", args.interevents)?;
    let prices: Vec<PathBuf> = r.list("prices", args.prices)?;
    let target_mean: Option<f64> = r.get("target-mean", args.target_mean)?;
    let settings = FitSettings::resolve(&mut r, args.fit)?;
    let output: Option<PathBuf> = r.get("output", args.output)?;
    let out_dir = r.out_dir(out_dir)?;
    r.finish()?;
    let output = output.unwrap_or_else(|| out_dir.join("fit.json"));

    let (assets, mean_tau) = match (interevents.is_empty(), prices.is_empty()) {
        (false, true) => {
            if target_mean.is_some() {
                return Err(CliError::Config(
                    "target-mean applies to price input only".into(),
                ));
            }
            let assets = interevents
                .iter()
                .map(|p| interevent_asset(p))
                .collect::<Result<Vec<_>>>()?;
            let all: Vec<f64> = assets.iter().flat_map(|a| a.interevents.iter().copied()).collect();
            let mean = all.iter().sum::<f64>() / all.len().max(1) as f64;
            (assets, mean)
        }
        (true, false) => {
            let target = target_mean.ok_or_else(|| {
                CliError::Config("price input needs a target-mean".into())
            })?;
            let target = positive("target-mean", target)?;
            let assets = prices
                .iter()
                .map(|p| PricedAsset::load(p)?.at_target(target))
                .collect::<Result<Vec<_>>>()?;
            (assets, target)
        }
        (false, false) => {
            return Err(CliError::Config(
                "give either interevents or prices, not both".into(),
            ))
        }
        (true, true) => {
            return Err(CliError::Config(
                "no input: give --interevents or --prices".into(),
            ))
        }
    };

    let outcome = fit_assets(&assets, &settings, mean_tau)?;
    let config = FitConfig {
        interevents: interevents.iter().map(|p| display(p)).collect(),
        prices: prices.iter().map(|p| display(p)).collect(),
        target_mean,
        settings,
        output: display(&output),
    };
    write_report(&output, "fit", &config, &outcome)?;
    if !outcome.converged {
        return Err(CliError::Numeric(format!(
            "the selected fit did not converge; best point written to {}",
            output.display()
        )));
    }
    let warnings = outcome
        .assets
        .iter()
        .filter(|a| !a.fit.converged)
        .map(|a| format!("{}: fit did not converge and is excluded from the average", a.source))
        .collect();
    Ok(Outcome {
        written: vec![output],
        warnings,
    })
}
