//! Self-excited Hawkes point process with an Omori-Utsu power-law memory
//! kernel, applied to waiting times between loss exceedances.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and everything else touching the operating system live in the
//! `omori-hawkes-cli` companion crate.
//!
//! Module map:
//!
//! - [`kernel`]: kernel parameters, the Omori-Utsu density, event histories
//!   and the conditional intensity.
//! - [`law`]: closed-form interevent-time density and survival function.
//! - [`simulate`]: thinning and branching simulators.
//! - [`calibrate`]: maximum-likelihood fits, parameter averaging and the
//!   rate-versus-mean-waiting-time scaling fit.
//! - [`market`]: prices to returns, loss exceedances, threshold search and
//!   log-binned empirical densities.
//! - [`stats`] and [`optim`]: Kolmogorov-Smirnov tests and the bounded
//!   simplex / golden-section minimizers used by the fits.

#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
mod math;

pub mod calibrate;
pub mod kernel;
pub mod law;
pub mod market;
pub mod optim;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};

pub use calibrate::{
    average_params, fit_mle, fit_scaling, AveragedParams, FitOptions, FitResult, Likelihood,
    ParamBounds, ScalingFit, ScalingFitParams,
};
pub use kernel::{
    conditional_intensity, omori_cdf, omori_pdf, omori_sample, EventSeries, KernelParams, Regime,
    SimulationParams,
};
pub use law::{
    interevent_log_pdf, interevent_pdf, interevent_survival, normalization_deficit,
    sample_interevent, IntereventLawParams, IntereventSampler,
};
pub use market::{
    empirical_pdf, extract_exceedances, find_threshold, prices_to_returns, rescale_for_collapse,
    EmpiricalPdf, PriceRow, ReturnSeries, ThresholdChoice,
};
pub use simulate::{simulate_branching, simulate_thinning, Simulation, SimulationReport};
