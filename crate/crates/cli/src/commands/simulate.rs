use std::path::PathBuf;

use omori_hawkes::{simulate_branching, simulate_thinning, KernelParams, Regime, SimulationParams, SimulationReport};
use serde::Serialize;

use super::{display, positive, write_report, Algorithm, Outcome};
use crate::cli::SimulateArgs;
use crate::config::ConfigFile;
use crate::error::{CliError, Result};
use crate::io;

#[derive(Debug, Clone, Serialize)]
pub struct SimulateConfig {
    pub n: f64,
    pub theta: f64,
    pub t0: f64,
    pub t0theta: f64,
    pub omega: f64,
    pub horizon: f64,
    pub seed: u64,
    /// True when no seed was supplied and one was drawn for this run.
    pub seed_generated: bool,
    pub algorithm: Algorithm,
    pub cap: Option<usize>,
    pub events_file: String,
    pub report_file: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateResult {
    pub regime: Regime,
    #[serde(flatten)]
    pub report: SimulationReport,
    /// `omega / (1 - n)` for a stationary process.
    pub expected_rate: Option<f64>,
}

/// A seed from the clock and process id, for runs without `--seed`.
fn fresh_seed() -> u64 {
    let nanos = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_nanos() as u64);
    // splitmix64 finalizer
    let mut z = nanos ^ ((std::process::id() as u64) << 32);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn run(args: SimulateArgs, file: &ConfigFile, out_dir: Option<PathBuf>) -> Result<Outcome> {
    let mut r = file.resolver();
    let n: f64 = r.require("n", args.n)?;
    let theta: f64 = r.require("theta", args.theta)?;
    let t0: Option<f64> = r.get("t0", args.t0)?;
    let t0theta: Option<f64> = r.get("t0theta", args.t0theta)?;
    let omega = positive("omega", r.require("omega", args.omega)?)?;
    let horizon = positive("horizon", r.require("horizon", args.horizon)?)?;
    let seed: Option<u64> = r.get("seed", args.seed)?;
    let algorithm = r.get_or("algorithm", args.algorithm, Algorithm::Thinning)?;
    let cap: Option<usize> = r.get("cap", args.cap)?;
    let out_dir = r.out_dir(out_dir)?;
    r.finish()?;

    let kernel = match (t0, t0theta) {
        (Some(t0), None) => KernelParams::from_t0(n, theta, t0)?,
        (None, Some(tt)) => KernelParams::new(n, theta, tt)?,
        (Some(_), Some(_)) => {
            return Err(CliError::Config("give either t0 or t0theta, not both".into()))
        }
        (None, None) => {
            return Err(CliError::Config(
                "missing required setting `t0` or `t0theta`".into(),
            ))
        }
    };
    if cap.is_none() && n >= 1.0 {
        let what = if n > 1.0 { "supercritical" } else { "critical" };
        return Err(CliError::Config(format!(
            "refusing to simulate a {what} process (n = {n}) without an event cap; \
             its event count grows without bound, pass --cap"
        )));
    }

    let (seed, seed_generated) = match seed {
        Some(s) => (s, false),
        None => (fresh_seed(), true),
    };
    let events_path = out_dir.join("events.csv");
    let report_path = out_dir.join("simulate.json");
    let config = SimulateConfig {
        n,
        theta,
        t0: t0.unwrap_or_else(|| kernel.t0()),
        t0theta: kernel.t0theta,
        omega,
        horizon,
        seed,
        seed_generated,
        algorithm,
        cap,
        events_file: display(&events_path),
        report_file: display(&report_path),
    };
    let sp = SimulationParams {
        kernel,
        omega,
        horizon,
        seed,
    };
    let sim = match algorithm {
        Algorithm::Thinning => simulate_thinning(&sp, cap)?,
        Algorithm::Branching => simulate_branching(&sp, cap)?,
    };

    let rows: Vec<Vec<String>> = sim.events.times().iter().map(|&t| vec![io::fmt_f64(t)]).collect();
    io::write_csv(&events_path, &["t"], &rows)?;
    let result = SimulateResult {
        regime: kernel.regime(),
        report: sim.report,
        expected_rate: (n < 1.0).then(|| omega / (1.0 - n)),
    };
    write_report(&report_path, "simulate", &config, &result)?;

    let mut warnings = Vec::new();
    if sim.report.cap_hit {
        warnings.push(format!("event cap reached; the series ends early at {} events", sim.report.event_count));
    }
    if seed_generated {
        warnings.push(format!("no seed given; using generated seed {seed}"));
    }
    Ok(Outcome {
        written: vec![events_path, report_path],
        warnings,
    })
}
