//! Omori-Utsu memory kernel, event histories and the conditional intensity.
//!
//! The intensity of the self-excited process with constant background rate
//! `omega` is
//!
//! ```text
//! lambda(t | H) = omega + n * sum_{t_i < t} phi(t - t_i)
//! phi(t)        = theta * t0^theta / (t0 + t)^(1 + theta)
//! ```
//!
//! where `n` is the branching ratio (mean number of first-generation
//! offspring per event). Time is measured in days throughout.
//!
//! Kernel parameters are stored as `(n, theta, t0^theta)` rather than
//! `(n, theta, t0)`: `t0^theta` is the quantity the calibration works with,
//! and `t0` is available through [`KernelParams::t0`].

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Criticality regime of a branching ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

/// The kernel triple: branching ratio, Omori exponent and microscale `t0^theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelParams {
    /// Branching ratio, `n >= 0`.
    pub n: f64,
    /// Omori exponent, `theta > 0` (the Omori `p` is `1 + theta`).
    pub theta: f64,
    /// `t0^theta` in days^theta, `> 0`.
    pub t0theta: f64,
}

impl KernelParams {
    pub fn new(n: f64, theta: f64, t0theta: f64) -> Result<Self> {
        let k = KernelParams { n, theta, t0theta };
        k.validate()?;
        Ok(k)
    }

    /// Builds the parameters from `t0` directly.
    pub fn from_t0(n: f64, theta: f64, t0: f64) -> Result<Self> {
        if !(t0.is_finite() && t0 > 0.0) {
            return Err(Error::param("t0", t0, "must be finite and > 0"));
        }
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::param("theta", theta, "must be finite and > 0"));
        }
        Self::new(n, theta, math::powf(t0, theta))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n.is_finite() && self.n >= 0.0) {
            return Err(Error::param("n", self.n, "must be finite and >= 0"));
        }
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::param("theta", self.theta, "must be finite and > 0"));
        }
        if !(self.t0theta.is_finite() && self.t0theta > 0.0) {
            return Err(Error::param(
                "t0theta",
                self.t0theta,
                "must be finite and > 0",
            ));
        }
        let t0 = self.t0();
        if !(t0.is_finite() && t0 > 0.0) {
            return Err(Error::param(
                "t0theta",
                self.t0theta,
                "derived t0 = t0theta^(1/theta) must be finite and > 0",
            ));
        }
        Ok(())
    }

    /// Microscopic time scale `t0 = (t0^theta)^(1/theta)` in days.
    pub fn t0(&self) -> f64 {
        math::powf(self.t0theta, 1.0 / self.theta)
    }

    pub fn regime(&self) -> Regime {
        if self.n < 1.0 {
            Regime::Subcritical
        } else if self.n == 1.0 {
            Regime::Critical
        } else {
            Regime::Supercritical
        }
    }
}

/// Precomputed Omori-Utsu kernel for hot loops. Construct only from
/// validated parameters.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Omori {
    theta: f64,
    t0: f64,
    scale: f64,
}

impl Omori {
    pub(crate) fn new(k: &KernelParams) -> Self {
        Omori {
            theta: k.theta,
            t0: k.t0(),
            scale: k.theta * k.t0theta,
        }
    }

    #[inline]
    pub(crate) fn pdf(&self, t: f64) -> f64 {
        self.scale * math::exp(-(1.0 + self.theta) * math::ln(self.t0 + t))
    }

    #[inline]
    pub(crate) fn cdf(&self, t: f64) -> f64 {
        // 1 - (t0 / (t0 + t))^theta, written to keep precision for small t.
        -math::expm1(-self.theta * math::ln1p(t / self.t0))
    }

    #[inline]
    pub(crate) fn inverse_cdf(&self, u: f64) -> f64 {
        self.t0 * math::expm1(-math::ln1p(-u) / self.theta)
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Normalized Omori-Utsu density `phi(t)` in 1/days.
pub fn omori_pdf(t: f64, k: &KernelParams) -> Result<f64> {
    k.validate()?;
    check_time(t)?;
    Ok(Omori::new(k).pdf(t))
}

/// Cumulative distribution `1 - (t0 / (t0 + t))^theta`.
pub fn omori_cdf(t: f64, k: &KernelParams) -> Result<f64> {
    k.validate()?;
    if t == f64::INFINITY {
        return Ok(1.0);
    }
    check_time(t)?;
    Ok(Omori::new(k).cdf(t))
}

/// Inverse CDF: maps `u` in `[0, 1)` to an offspring lag in days.
pub fn omori_sample(u: f64, k: &KernelParams) -> Result<f64> {
    k.validate()?;
    if !(0.0..1.0).contains(&u) {
        return Err(Error::Domain(format!("u must lie in [0, 1), got {u}")));
    }
    Ok(Omori::new(k).inverse_cdf(u))
}

/// Strictly increasing event times observed on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EventSeries {
    times: Vec<f64>,
    horizon: f64,
}

impl EventSeries {
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::param("horizon", horizon, "must be finite and >= 0"));
        }
        for (i, &t) in times.iter().enumerate() {
            if !(t.is_finite() && (0.0..=horizon).contains(&t)) {
                return Err(Error::Data(format!(
                    "event {i} at {t} lies outside [0, {horizon}]"
                )));
            }
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Data(format!(
                "event times must be strictly increasing (index {})",
                i + 1
            )));
        }
        Ok(EventSeries { times, horizon })
    }

    /// An empty history on `[0, horizon]`.
    pub fn empty(horizon: f64) -> Result<Self> {
        Self::new(Vec::new(), horizon)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Durations between consecutive events; all strictly positive.
    pub fn interevents(&self) -> Vec<f64> {
        self.times.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn into_times(self) -> Vec<f64> {
        self.times
    }
}

/// Exact `omega + n * sum phi(t - t_i)` over the events strictly before `t`.
/// `times` must be sorted ascending.
#[inline]
pub(crate) fn intensity_at(t: f64, times: &[f64], omega: f64, n: f64, kernel: &Omori) -> f64 {
    let end = times.partition_point(|&ti| ti < t);
    let excitation: f64 = times[..end].iter().map(|&ti| kernel.pdf(t - ti)).sum();
    omega + n * excitation
}

/// Conditional intensity `lambda(t | H)` in events/day. Only history events
/// strictly before `t` contribute.
pub fn conditional_intensity(
    t: f64,
    history: &EventSeries,
    omega: f64,
    k: &KernelParams,
) -> Result<f64> {
    k.validate()?;
    check_time(t)?;
    if !(omega.is_finite() && omega >= 0.0) {
        return Err(Error::param("omega", omega, "must be finite and >= 0"));
    }
    Ok(intensity_at(t, history.times(), omega, k.n, &Omori::new(k)))
}

/// Inputs of a simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimulationParams {
    pub kernel: KernelParams,
    /// Background intensity in events/day.
    pub omega: f64,
    /// Observation window `[0, horizon]` in days.
    pub horizon: f64,
    pub seed: u64,
}

impl SimulationParams {
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::param("omega", self.omega, "must be finite and > 0"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::param(
                "horizon",
                self.horizon,
                "must be finite and > 0",
            ));
        }
        Ok(())
    }
}
