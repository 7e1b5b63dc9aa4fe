//! Maximum-likelihood calibration of the interevent law, cross-asset
//! averaging, and the fit of `lambda(<tau>) = a + b exp(-<tau> / tau0)`.
//!
//! [`fit_mle`] runs a box-constrained Nelder-Mead from Latin-hypercube starts
//! over `(n, theta, lambda, t0^theta)`. The optimizer works in unit
//! coordinates: linear for `n` and `theta`, logarithmic for `lambda` and
//! `t0^theta`. `t0^theta` is the fitted quantity, not `t0`.
//!
//! Three likelihoods are available, see [`Likelihood`].

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::law::{IntereventLawParams, Law};
use crate::math;
use crate::optim::{golden_section, NelderMead};

/// Which density the likelihood is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Likelihood {
    /// The printed density as is. It is not normalized (its integral over
    /// `(0, inf)` diverges), so the maximum typically runs into the box.
    Literal,
    /// `P(tau) / S(t0)` on `tau >= t0`: the law the sampler draws from.
    /// Requires `t0 <= min(sample)`.
    #[default]
    Renormalized,
    /// Integer-day durations: `P(k) = [S(max(k - 1, t0)) - S(k)] / S(t0)`
    /// for `k = 1, 2, ...`. Requires `t0 < 1`.
    DailyBinned,
}

/// Closed box for the fitted parameters; every interval must satisfy `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ParamBounds {
    pub n: [f64; 2],
    pub theta: [f64; 2],
    pub lambda: [f64; 2],
    pub t0theta: [f64; 2],
}

impl Default for ParamBounds {
    fn default() -> Self {
        ParamBounds {
            n: [0.0, 1.0],
            theta: [0.01, 0.99],
            lambda: [1e-4, 1e2],
            t0theta: [1e-4, 10.0],
        }
    }
}

impl ParamBounds {
    pub fn validate(&self) -> Result<()> {
        let check = |name: &'static str, [lo, hi]: [f64; 2], ok: bool| {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::param(name, lo, "bounds must be finite with lo < hi"));
            }
            if !ok {
                return Err(Error::param(name, lo, "bounds leave the parameter domain"));
            }
            Ok(())
        };
        check("n", self.n, self.n[0] >= 0.0 && self.n[1] <= 1.0)?;
        check("theta", self.theta, self.theta[0] > 0.0 && self.theta[1] < 1.0)?;
        check("lambda", self.lambda, self.lambda[0] > 0.0)?;
        check("t0theta", self.t0theta, self.t0theta[0] > 0.0)?;
        Ok(())
    }

    fn to_params(self, u: &[f64]) -> IntereventLawParams {
        let lin = |[lo, hi]: [f64; 2], x: f64| lo + x * (hi - lo);
        let log = |[lo, hi]: [f64; 2], x: f64| {
            math::exp(math::ln(lo) + x * (math::ln(hi) - math::ln(lo)))
        };
        IntereventLawParams {
            kernel: KernelParams {
                n: lin(self.n, u[0]),
                theta: lin(self.theta, u[1]),
                t0theta: log(self.t0theta, u[3]),
            },
            lambda: log(self.lambda, u[2]),
        }
    }

    fn to_unit(self, p: &IntereventLawParams) -> [f64; 4] {
        let lin = |[lo, hi]: [f64; 2], x: f64| ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        let log = |[lo, hi]: [f64; 2], x: f64| {
            ((math::ln(x) - math::ln(lo)) / (math::ln(hi) - math::ln(lo))).clamp(0.0, 1.0)
        };
        [
            lin(self.n, p.kernel.n),
            lin(self.theta, p.kernel.theta),
            log(self.lambda, p.lambda),
            log(self.t0theta, p.kernel.t0theta),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitOptions {
    pub bounds: ParamBounds,
    /// Number of Latin-hypercube starts.
    pub starts: usize,
    pub seed: u64,
    pub likelihood: Likelihood,
    /// Simplex diameter in unit coordinates at which a start has converged.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Estimate standard errors from the observed information.
    pub standard_errors: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            bounds: ParamBounds::default(),
            starts: 8,
            seed: 0,
            likelihood: Likelihood::default(),
            tolerance: 1e-6,
            max_iterations: 5000,
            standard_errors: true,
        }
    }
}

/// Which parameters ended on their box bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundaryFlags {
    pub n: bool,
    pub theta: bool,
    pub lambda: bool,
    pub t0theta: bool,
}

/// Standard errors from the inverse observed information. Parameters on a
/// bound are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StandardErrors {
    pub n: Option<f64>,
    pub theta: Option<f64>,
    pub lambda: Option<f64>,
    pub t0theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StartSummary {
    pub initial: IntereventLawParams,
    pub initial_log_likelihood: f64,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FitResult {
    pub params: IntereventLawParams,
    pub log_likelihood: f64,
    /// The best start converged and no parameter other than `n` sits on its bound.
    pub converged: bool,
    /// Simplex iterations of the winning start.
    pub iterations: usize,
    pub evaluations: usize,
    pub at_bound: BoundaryFlags,
    pub stderr: Option<StandardErrors>,
    pub likelihood: Likelihood,
    pub sample_size: usize,
    pub starts: Vec<StartSummary>,
}

pub const MIN_SAMPLE: usize = 30;

/// Sample compressed to distinct values with multiplicities.
struct Objective {
    likelihood: Likelihood,
    /// `(tau, ln tau, count)`, ascending in `tau`.
    values: Vec<(f64, f64, f64)>,
    total: f64,
    tau_min: f64,
}

impl Objective {
    fn new(sample: &[f64], likelihood: Likelihood) -> Result<Self> {
        if sample.len() < MIN_SAMPLE {
            return Err(Error::InsufficientData {
                needed: MIN_SAMPLE,
                found: sample.len(),
            });
        }
        if let Some(bad) = sample.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::Data(format!(
                "interevent times must be finite and > 0, found {bad}"
            )));
        }
        if likelihood == Likelihood::DailyBinned {
            if let Some(bad) = sample.iter().find(|t| **t != math::floor(**t)) {
                return Err(Error::Data(format!(
                    "daily-binned likelihood needs whole-day durations, found {bad}"
                )));
            }
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut values: Vec<(f64, f64, f64)> = Vec::new();
        for &t in &sorted {
            match values.last_mut() {
                Some(last) if last.0 == t => last.2 += 1.0,
                _ => values.push((t, math::ln(t), 1.0)),
            }
        }
        Ok(Objective {
            likelihood,
            tau_min: sorted[0],
            total: sample.len() as f64,
            values,
        })
    }

    /// Log-likelihood, `-inf` where the parameters are infeasible for the data.
    fn log_likelihood(&self, p: &IntereventLawParams) -> f64 {
        if p.validate().is_err() {
            return f64::NEG_INFINITY;
        }
        let law = Law::new(p);
        let t0 = law.t0();
        let v = match self.likelihood {
            Likelihood::Literal => self
                .values
                .iter()
                .map(|&(t, lt, w)| w * law.ln_pdf_ln(t, lt))
                .sum(),
            Likelihood::Renormalized => {
                if t0 > self.tau_min {
                    return f64::NEG_INFINITY;
                }
                let body: f64 = self
                    .values
                    .iter()
                    .map(|&(t, lt, w)| w * law.ln_pdf_ln(t, lt))
                    .sum();
                body - self.total * law.ln_survival(t0)
            }
            Likelihood::DailyBinned => {
                let ln_s0 = law.ln_survival(t0);
                let mut acc = 0.0;
                for &(k, lk, w) in &self.values {
                    let lower = if k - 1.0 > t0 { k - 1.0 } else { t0 };
                    if lower >= k {
                        return f64::NEG_INFINITY;
                    }
                    let ln_lo = if lower == t0 { ln_s0 } else { law.ln_survival(lower) };
                    let ln_hi = law.ln_survival_ln(k, lk);
                    // ln(S(lower) - S(k)) = ln S(lower) + ln(1 - S(k)/S(lower))
                    acc += w * (ln_lo + math::ln(-math::expm1(ln_hi - ln_lo)));
                }
                acc - self.total * ln_s0
            }
        };
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }

    /// Largest `t0` the data admit, or `None` if unconstrained.
    fn t0_cap(&self) -> Option<f64> {
        match self.likelihood {
            Likelihood::Literal => None,
            Likelihood::Renormalized => Some(self.tau_min),
            Likelihood::DailyBinned => Some(1.0),
        }
    }
}

fn latin_hypercube(starts: usize, dim: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let mut points = vec![vec![0.0; dim]; starts];
    for d in 0..dim {
        let mut strata: Vec<usize> = (0..starts).collect();
        strata.shuffle(rng);
        for (point, &s) in points.iter_mut().zip(&strata) {
            let jitter = math::open_unit(rng);
            // Keep starts off the faces of the box.
            point[d] = 0.05 + 0.9 * (s as f64 + jitter) / starts as f64;
        }
    }
    points
}

/// Fits the interevent law to `sample` by maximum likelihood.
///
/// The best converged start wins, ties going to the lowest start index. If no
/// start converges the error carries the best point found.
pub fn fit_mle(sample: &[f64], opts: &FitOptions) -> Result<FitResult> {
    opts.bounds.validate()?;
    if opts.starts == 0 {
        return Err(Error::Domain("at least one optimizer start is required".into()));
    }
    let objective = Objective::new(sample, opts.likelihood)?;
    let bounds = opts.bounds;
    let scale = objective.total;
    let cost = |u: &[f64]| -objective.log_likelihood(&bounds.to_params(u)) / scale;

    let nm = NelderMead {
        tolerance: opts.tolerance,
        max_iterations: opts.max_iterations,
        initial_step: 0.1,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut summaries = Vec::with_capacity(opts.starts);
    let mut outcomes = Vec::with_capacity(opts.starts);
    let mut evaluations = 0;
    for mut u0 in latin_hypercube(opts.starts, 4, &mut rng) {
        let mut initial = bounds.to_params(&u0);
        if let Some(cap) = objective.t0_cap() {
            // Pull t0 inside the feasible region: t0 <= cap / 2.
            let max_t0theta = math::powf(0.5 * cap, initial.kernel.theta);
            if initial.kernel.t0theta > max_t0theta {
                initial.kernel.t0theta = max_t0theta;
                u0 = bounds.to_unit(&initial).to_vec();
                initial = bounds.to_params(&u0);
            }
        }
        let initial_ll = objective.log_likelihood(&initial);
        let m = nm.minimize(cost, &u0, &[0.0; 4], &[1.0; 4]);
        evaluations += m.evaluations;
        let ll = -m.value * scale;
        summaries.push(StartSummary {
            initial,
            initial_log_likelihood: initial_ll,
            log_likelihood: ll,
            converged: m.converged && ll.is_finite(),
            iterations: m.iterations,
        });
        outcomes.push(m);
    }

    let pick = |only_converged: bool| {
        let mut best: Option<usize> = None;
        for (i, s) in summaries.iter().enumerate() {
            if only_converged && !s.converged || !s.log_likelihood.is_finite() {
                continue;
            }
            if best.is_none_or(|b| s.log_likelihood > summaries[b].log_likelihood) {
                best = Some(i);
            }
        }
        best
    };

    let build = |i: usize, summaries: Vec<StartSummary>| {
        let u = &outcomes[i].x;
        let params = bounds.to_params(u);
        let edge = 10.0 * opts.tolerance;
        let on = |x: f64| x <= edge || x >= 1.0 - edge;
        let at_bound = BoundaryFlags {
            n: on(u[0]),
            theta: on(u[1]),
            lambda: on(u[2]),
            t0theta: on(u[3]),
        };
        let converged =
            summaries[i].converged && !(at_bound.theta || at_bound.lambda || at_bound.t0theta);
        let stderr = if opts.standard_errors && converged {
            standard_errors(&objective, &params, &at_bound)
        } else {
            None
        };
        FitResult {
            params,
            log_likelihood: summaries[i].log_likelihood,
            converged,
            iterations: summaries[i].iterations,
            evaluations,
            at_bound,
            stderr,
            likelihood: opts.likelihood,
            sample_size: sample.len(),
            starts: summaries,
        }
    };

    match pick(true) {
        Some(i) => Ok(build(i, summaries)),
        None => {
            let best = pick(false).map(|i| Box::new(build(i, summaries)));
            Err(Error::NotConverged {
                starts: opts.starts,
                best,
            })
        }
    }
}

/// Inverse observed information for the parameters not on a bound; `None`
/// when the Hessian cannot be formed or is not negative definite.
fn standard_errors(
    objective: &Objective,
    p: &IntereventLawParams,
    at_bound: &BoundaryFlags,
) -> Option<StandardErrors> {
    let x0 = [p.kernel.n, p.kernel.theta, p.lambda, p.kernel.t0theta];
    let free: Vec<usize> = [at_bound.n, at_bound.theta, at_bound.lambda, at_bound.t0theta]
        .iter()
        .enumerate()
        .filter(|(_, b)| !**b)
        .map(|(i, _)| i)
        .collect();
    if free.is_empty() {
        return None;
    }
    let ll = |x: &[f64; 4]| {
        objective.log_likelihood(&IntereventLawParams {
            kernel: KernelParams {
                n: x[0],
                theta: x[1],
                t0theta: x[3],
            },
            lambda: x[2],
        })
    };
    let h: Vec<f64> = x0.iter().map(|v| 1e-4 * v.abs().max(1e-3)).collect();
    let f0 = ll(&x0);
    let shifted = |moves: &[(usize, f64)]| {
        let mut x = x0;
        for &(i, s) in moves {
            x[i] += s * h[i];
        }
        ll(&x)
    };
    let m = free.len();
    // Observed information = -Hessian.
    let mut info = vec![0.0; m * m];
    for a in 0..m {
        let i = free[a];
        let d2 = (shifted(&[(i, 1.0)]) - 2.0 * f0 + shifted(&[(i, -1.0)])) / (h[i] * h[i]);
        info[a * m + a] = -d2;
        for b in 0..a {
            let j = free[b];
            let d = (shifted(&[(i, 1.0), (j, 1.0)]) - shifted(&[(i, 1.0), (j, -1.0)])
                - shifted(&[(i, -1.0), (j, 1.0)])
                + shifted(&[(i, -1.0), (j, -1.0)]))
                / (4.0 * h[i] * h[j]);
            info[a * m + b] = -d;
            info[b * m + a] = -d;
        }
    }
    if info.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let diag = cholesky_inverse_diagonal(&info, m)?;
    let mut out = StandardErrors::default();
    for (a, &i) in free.iter().enumerate() {
        let se = Some(math::sqrt(diag[a]));
        match i {
            0 => out.n = se,
            1 => out.theta = se,
            2 => out.lambda = se,
            _ => out.t0theta = se,
        }
    }
    Some(out)
}

/// Diagonal of `A^-1` for symmetric positive-definite `A` (row-major `m x m`).
fn cholesky_inverse_diagonal(a: &[f64], m: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i * m + k] * l[j * m + k]).sum();
            if i == j {
                let d = a[i * m + i] - s;
                if d.is_nan() || d <= 0.0 {
                    return None;
                }
                l[i * m + i] = math::sqrt(d);
            } else {
                l[i * m + j] = (a[i * m + j] - s) / l[j * m + j];
            }
        }
    }
    // A^-1 = L^-T L^-1, so (A^-1)_ii is the squared norm of column i of L^-1.
    let mut diag = vec![0.0; m];
    for (col, slot) in diag.iter_mut().enumerate() {
        let mut y = vec![0.0; m];
        for i in 0..m {
            let rhs = if i == col { 1.0 } else { 0.0 };
            let s: f64 = (0..i).map(|k| l[i * m + k] * y[k]).sum();
            y[i] = (rhs - s) / l[i * m + i];
        }
        *slot = y.iter().map(|yi| yi * yi).sum();
    }
    Some(diag)
}

/// Parameter mean over the converged fits.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AveragedParams {
    pub params: IntereventLawParams,
    pub used: usize,
    pub excluded: usize,
}

/// Arithmetic mean of `(n, theta, lambda, t0^theta)` over converged fits.
pub fn average_params(fits: &[FitResult]) -> Result<AveragedParams> {
    let used: Vec<&FitResult> = fits.iter().filter(|f| f.converged).collect();
    if used.is_empty() {
        return Err(Error::InsufficientData {
            needed: 1,
            found: 0,
        });
    }
    let k = used.len() as f64;
    let mean = |g: fn(&IntereventLawParams) -> f64| used.iter().map(|f| g(&f.params)).sum::<f64>() / k;
    let params = IntereventLawParams {
        kernel: KernelParams {
            n: mean(|p| p.kernel.n),
            theta: mean(|p| p.kernel.theta),
            t0theta: mean(|p| p.kernel.t0theta),
        },
        lambda: mean(|p| p.lambda),
    };
    params.validate()?;
    Ok(AveragedParams {
        params,
        used: used.len(),
        excluded: fits.len() - used.len(),
    })
}

/// `lambda(<tau>) = a + b exp(-<tau> / tau0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingFitParams {
    /// Asymptotic rate, events/day.
    pub a: f64,
    /// Decay amplitude, events/day.
    pub b: f64,
    /// Decay scale, days.
    pub tau0: f64,
}

impl ScalingFitParams {
    pub fn eval(&self, mean_tau: f64) -> f64 {
        self.a + self.b * math::exp(-mean_tau / self.tau0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingFit {
    pub params: ScalingFitParams,
    /// Euclidean norm of the residuals.
    pub residual_norm: f64,
}

pub const MIN_SCALING_POINTS: usize = 4;

/// Linear least squares for `(a, b)` at fixed `tau0`; returns `(a, b, rss)`.
fn profile(points: &[(f64, f64)], tau0: f64) -> (f64, f64, f64) {
    let k = points.len() as f64;
    let z: Vec<f64> = points.iter().map(|(x, _)| math::exp(-x / tau0)).collect();
    let zbar = z.iter().sum::<f64>() / k;
    let ybar = points.iter().map(|p| p.1).sum::<f64>() / k;
    let (mut szz, mut szy) = (0.0, 0.0);
    for (zi, (_, y)) in z.iter().zip(points) {
        szz += (zi - zbar) * (zi - zbar);
        szy += (zi - zbar) * (y - ybar);
    }
    if szz.is_nan() || szz <= 1e-300 {
        return (ybar, 0.0, f64::INFINITY);
    }
    let b = szy / szz;
    let a = ybar - b * zbar;
    let rss = z
        .iter()
        .zip(points)
        .map(|(zi, (_, y))| {
            let r = y - a - b * zi;
            r * r
        })
        .sum();
    (a, b, rss)
}

fn rss_of(points: &[(f64, f64)], a: f64, b: f64, tau0: f64) -> f64 {
    points
        .iter()
        .map(|&(x, y)| {
            let r = y - a - b * math::exp(-x / tau0);
            r * r
        })
        .sum()
}

/// Levenberg-Marquardt refinement of `(a, b, tau0)` from a good start.
fn polish(points: &[(f64, f64)], mut a: f64, mut b: f64, mut tau0: f64) -> (f64, f64, f64) {
    let mut mu = 1e-6;
    let mut rss = rss_of(points, a, b, tau0);
    for _ in 0..100 {
        let mut jtj = [[0.0f64; 3]; 3];
        let mut jtr = [0.0f64; 3];
        for &(x, y) in points {
            let e = math::exp(-x / tau0);
            let r = y - a - b * e;
            let j = [1.0, e, b * e * x / (tau0 * tau0)];
            for p in 0..3 {
                jtr[p] += j[p] * r;
                for q in 0..3 {
                    jtj[p][q] += j[p] * j[q];
                }
            }
        }
        let mut improved = false;
        for _ in 0..20 {
            let mut m = jtj;
            for (p, row) in m.iter_mut().enumerate() {
                row[p] *= 1.0 + mu;
            }
            let Some(step) = solve3(m, jtr) else {
                mu *= 10.0;
                continue;
            };
            let (na, nb, nt) = (a + step[0], b + step[1], tau0 + step[2]);
            let new = if nt > 0.0 { rss_of(points, na, nb, nt) } else { f64::INFINITY };
            if new <= rss {
                let done = rss - new <= 1e-30 + 1e-15 * rss;
                a = na;
                b = nb;
                tau0 = nt;
                rss = new;
                mu = (mu * 0.1).max(1e-12);
                improved = !done;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    (a, b, tau0)
}

/// Cramer's rule for a 3x3 system.
fn solve3(m: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(&m);
    if d.is_nan() || d.abs() <= 1e-300 {
        return None;
    }
    let mut out = [0.0; 3];
    for (c, o) in out.iter_mut().enumerate() {
        let mut mc = m;
        for row in 0..3 {
            mc[row][c] = r[row];
        }
        *o = det(&mc) / d;
    }
    Some(out)
}

/// Nonlinear least squares fit of the rate scaling law to
/// `(mean interevent time, lambda)` points.
///
/// `tau0` is found by profiling out the linear `(a, b)` over a log grid,
/// refined by golden section and polished with Levenberg-Marquardt.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < MIN_SCALING_POINTS {
        return Err(Error::InsufficientData {
            needed: MIN_SCALING_POINTS,
            found: points.len(),
        });
    }
    if let Some(bad) = points
        .iter()
        .find(|(x, y)| !(x.is_finite() && *x > 0.0 && y.is_finite()))
    {
        return Err(Error::Data(format!(
            "scaling points need finite positive mean times and finite rates, found {bad:?}"
        )));
    }
    let xmin = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let xmax = points.iter().map(|p| p.0).fold(0.0, f64::max);
    let span = xmax - xmin;
    if span <= 1e-12 * xmax {
        return Err(Error::IllConditioned(
            "all mean interevent times are equal".into(),
        ));
    }
    let ymean = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let yscale = points.iter().map(|p| p.1.abs()).fold(0.0, f64::max);
    let yspread = points.iter().map(|p| (p.1 - ymean).abs()).fold(0.0, f64::max);
    if yspread <= 1e-12 * yscale {
        return Err(Error::IllConditioned(
            "rates are constant, decay scale is unidentifiable".into(),
        ));
    }

    const GRID: usize = 400;
    let (s_lo, s_hi) = (math::ln(1e-3 * span), math::ln(1e3 * span));
    let s_at = |i: usize| s_lo + (s_hi - s_lo) * i as f64 / (GRID - 1) as f64;
    let rss_at = |s: f64| profile(points, math::exp(s)).2;
    let best = (0..GRID)
        .min_by(|&i, &j| rss_at(s_at(i)).total_cmp(&rss_at(s_at(j))))
        .unwrap_or(0);
    if best == 0 || best == GRID - 1 {
        return Err(Error::IllConditioned(format!(
            "decay scale runs to the search limit ({:.3e} days)",
            math::exp(s_at(best))
        )));
    }
    let (s, _) = golden_section(rss_at, s_at(best - 1), s_at(best + 1), 1e-12, 200);
    let tau0 = math::exp(s);
    let (a, b, _) = profile(points, tau0);
    let (a, b, tau0) = polish(points, a, b, tau0);
    let rss = rss_of(points, a, b, tau0);

    if !(b > 0.0 && tau0 > 0.0 && a >= 0.0) || !rss.is_finite() {
        return Err(Error::IllConditioned(format!(
            "fitted a = {a}, b = {b}, tau0 = {tau0} violate a >= 0, b > 0, tau0 > 0"
        )));
    }
    Ok(ScalingFit {
        params: ScalingFitParams { a, b, tau0 },
        residual_norm: math::sqrt(rss),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::sample_interevent;

    const TABLE1_POINTS: [(f64, f64); 5] =
        [(2.0, 0.899), (5.0, 0.737), (10.0, 0.462), (30.0, 0.254), (70.0, 0.154)];

    #[test]
    fn scaling_on_published_rates() {
        let fit = fit_scaling(&TABLE1_POINTS).unwrap();
        let p = fit.params;
        assert!((0.13..=0.21).contains(&p.a), "{p:?}");
        assert!((0.83..=0.97).contains(&p.b), "{p:?}");
        assert!((8.0..=12.0).contains(&p.tau0), "{p:?}");
        // Independent least-squares solution (scipy curve_fit).
        assert!((p.a - 0.177_256).abs() < 1e-4);
        assert!((p.b - 0.897_413).abs() < 1e-4);
        assert!((p.tau0 - 9.613_905).abs() < 1e-3);
    }

    #[test]
    fn scaling_exact_recovery() {
        let truth = ScalingFitParams {
            a: 0.2,
            b: 1.0,
            tau0: 8.0,
        };
        let pts: Vec<(f64, f64)> = [1.0, 3.0, 7.0, 15.0, 40.0, 90.0]
            .iter()
            .map(|&x| (x, truth.eval(x)))
            .collect();
        let fit = fit_scaling(&pts).unwrap();
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        assert!(rel(fit.params.a, 0.2) <= 1e-6);
        assert!(rel(fit.params.b, 1.0) <= 1e-6);
        assert!(rel(fit.params.tau0, 8.0) <= 1e-6);
        assert!(fit.residual_norm < 1e-9);
    }

    #[test]
    fn scaling_degenerate_inputs() {
        assert!(matches!(
            fit_scaling(&TABLE1_POINTS[..3]),
            Err(Error::InsufficientData { needed: 4, found: 3 })
        ));
        let flat = [(1.0, 0.3), (5.0, 0.3), (10.0, 0.3), (40.0, 0.3)];
        assert!(matches!(fit_scaling(&flat), Err(Error::IllConditioned(_))));
        let same_x = [(5.0, 0.3), (5.0, 0.4), (5.0, 0.5), (5.0, 0.6)];
        assert!(matches!(fit_scaling(&same_x), Err(Error::IllConditioned(_))));
    }

    fn fit_of(n: f64, theta: f64, lambda: f64, t0theta: f64, converged: bool) -> FitResult {
        FitResult {
            params: IntereventLawParams::new(n, theta, lambda, t0theta).unwrap(),
            log_likelihood: -1.0,
            converged,
            iterations: 1,
            evaluations: 1,
            at_bound: BoundaryFlags::default(),
            stderr: None,
            likelihood: Likelihood::Renormalized,
            sample_size: 100,
            starts: Vec::new(),
        }
    }

    #[test]
    fn averaging() {
        let one = fit_of(0.8, 0.3, 0.5, 0.4, true);
        assert_eq!(average_params(core::slice::from_ref(&one)).unwrap().params, one.params);

        let two = fit_of(1.0, 0.3, 0.5, 0.4, true);
        let avg = average_params(&[one.clone(), two.clone()]).unwrap();
        assert!((avg.params.kernel.n - 0.9).abs() < 1e-15);

        let bad = fit_of(0.1, 0.9, 5.0, 2.0, false);
        let avg = average_params(&[one.clone(), bad.clone(), two.clone()]).unwrap();
        assert_eq!((avg.used, avg.excluded), (2, 1));
        assert!((avg.params.kernel.n - 0.9).abs() < 1e-15);

        assert!(average_params(&[bad]).is_err());
        assert!(average_params(&[]).is_err());

        let rev = average_params(&[two, one]).unwrap();
        assert!((rev.params.kernel.n - 0.9).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_samples() {
        let opts = FitOptions::default();
        assert!(matches!(
            fit_mle(&[1.0; 10], &opts),
            Err(Error::InsufficientData { .. })
        ));
        let mut xs = vec![1.0; 40];
        xs[3] = 0.0;
        assert!(matches!(fit_mle(&xs, &opts), Err(Error::Data(_))));
        let xs: Vec<f64> = (0..40).map(|i| 1.5 + i as f64).collect();
        let daily = FitOptions {
            likelihood: Likelihood::DailyBinned,
            ..opts
        };
        assert!(matches!(fit_mle(&xs, &daily), Err(Error::Data(_))));
    }

    #[test]
    fn daily_binned_probabilities_sum_to_one() {
        let p = IntereventLawParams::new(0.9, 0.3, 0.4, 0.3).unwrap();
        let law = Law::new(&p);
        let t0 = law.t0();
        let s0 = law.survival(t0);
        let total: f64 = (1..200_000)
            .map(|k| {
                let k = k as f64;
                (law.survival((k - 1.0).max(t0)) - law.survival(k)) / s0
            })
            .sum();
        assert!((total - 1.0).abs() < 1e-6, "total={total}");
    }

    #[test]
    fn constant_sample_is_not_a_clean_fit() {
        let xs = vec![5.0; 200];
        match fit_mle(&xs, &FitOptions::default()) {
            Ok(fit) => assert!(!fit.converged, "{:?}", fit.params),
            Err(Error::NotConverged { .. }) => {}
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn exponential_round_trip() {
        let truth = IntereventLawParams::new(0.0, 0.5, 0.5, 1e-3).unwrap();
        let xs = sample_interevent(&truth, 20_000, 1).unwrap();
        let fit = fit_mle(&xs, &FitOptions::default()).unwrap();
        assert!((fit.params.lambda - 0.5).abs() < 0.02, "{:?}", fit.params);
        assert!(fit.params.kernel.n <= 0.05, "{:?}", fit.params);
    }

    #[test]
    fn improves_on_every_start() {
        let truth = IntereventLawParams::new(0.7, 0.3, 0.6, 0.3).unwrap();
        let xs = sample_interevent(&truth, 3000, 4).unwrap();
        let fit = fit_mle(&xs, &FitOptions::default()).unwrap();
        assert_eq!(fit.starts.len(), 8);
        for s in &fit.starts {
            assert!(fit.log_likelihood >= s.initial_log_likelihood);
        }
        assert!(fit.log_likelihood.is_finite());
        assert!(fit.params.validate().is_ok());
    }

    #[test]
    fn deterministic_given_seed() {
        let truth = IntereventLawParams::new(0.7, 0.3, 0.6, 0.3).unwrap();
        let xs = sample_interevent(&truth, 500, 4).unwrap();
        let opts = FitOptions {
            seed: 3,
            ..FitOptions::default()
        };
        assert_eq!(fit_mle(&xs, &opts).unwrap(), fit_mle(&xs, &opts).unwrap());
    }

    #[test]
    fn daily_binned_recovers_rounded_sample() {
        let truth = IntereventLawParams::new(1.0, 0.29, 0.737, 0.41).unwrap();
        let xs: Vec<f64> = sample_interevent(&truth, 20_000, 8)
            .unwrap()
            .into_iter()
            .map(f64::ceil)
            .collect();
        let opts = FitOptions {
            likelihood: Likelihood::DailyBinned,
            ..FitOptions::default()
        };
        let fit = fit_mle(&xs, &opts).unwrap();
        let p = fit.params;
        assert!(p.kernel.n >= 0.85, "{p:?}");
        assert!((p.kernel.theta - 0.29).abs() < 0.1, "{p:?}");
        assert!(((p.lambda - 0.737) / 0.737).abs() < 0.1, "{p:?}");
    }

    #[test]
    fn cholesky_inverse_of_known_matrix() {
        // [[4, 2], [2, 3]]^-1 = [[3, -2], [-2, 4]] / 8
        let d = cholesky_inverse_diagonal(&[4.0, 2.0, 2.0, 3.0], 2).unwrap();
        assert!((d[0] - 0.375).abs() < 1e-15 && (d[1] - 0.5).abs() < 1e-15);
        assert!(cholesky_inverse_diagonal(&[1.0, 2.0, 2.0, 1.0], 2).is_none());
    }
}
