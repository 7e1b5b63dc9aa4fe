//! Closed-form interevent-time law of the Omori-kernel Hawkes process.
//!
//! With mean event rate `lambda` and the kernel triple `(n, theta, t0^theta)`,
//!
//! ```text
//! A(tau)  = (1 - n) tau + n t0^theta tau^(1 - theta) / (1 - theta)
//! A'(tau) = (1 - n) + n t0^theta tau^(-theta)
//! S(tau)  = A'(tau) exp(-lambda A(tau))
//! P(tau)  = -S'(tau)
//!         = lambda [n theta t0^theta / (lambda tau^(1 + theta)) + A'(tau)^2] exp(-lambda A(tau))
//! ```
//!
//! `P` is the printed density, evaluated literally. It is only a proper
//! density on `[t0, inf)` up to the mass `1 - S(t0)` (see
//! [`normalization_deficit`]); below `t0`, `S` exceeds one and its integral
//! diverges at the origin. The sampler therefore draws from the law
//! conditioned on `tau >= t0`.

use alloc::format;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::KernelParams;
use crate::math;

/// Parameters of the interevent law: the kernel plus the mean event rate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IntereventLawParams {
    pub kernel: KernelParams,
    /// Mean event rate in events/day.
    pub lambda: f64,
}

impl IntereventLawParams {
    pub fn new(n: f64, theta: f64, lambda: f64, t0theta: f64) -> Result<Self> {
        let p = IntereventLawParams {
            kernel: KernelParams { n, theta, t0theta },
            lambda,
        };
        p.validate()?;
        Ok(p)
    }

    /// Requires `0 <= n <= 1`, `0 < theta < 1` and `lambda > 0` on top of
    /// the kernel invariants.
    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if self.kernel.n > 1.0 {
            return Err(Error::param(
                "n",
                self.kernel.n,
                "interevent law requires n <= 1",
            ));
        }
        if self.kernel.theta >= 1.0 {
            return Err(Error::param(
                "theta",
                self.kernel.theta,
                "interevent law requires 0 < theta < 1",
            ));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::param("lambda", self.lambda, "must be finite and > 0"));
        }
        Ok(())
    }

    pub fn n(&self) -> f64 {
        self.kernel.n
    }

    pub fn theta(&self) -> f64 {
        self.kernel.theta
    }

    pub fn t0theta(&self) -> f64 {
        self.kernel.t0theta
    }

    pub fn t0(&self) -> f64 {
        self.kernel.t0()
    }
}

/// Precomputed law for repeated evaluation. Build only from validated params.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Law {
    n: f64,
    theta: f64,
    t0theta: f64,
    lambda: f64,
    t0: f64,
    ln_lambda: f64,
    /// `ln(n theta t0^theta / lambda)`, `-inf` when `n == 0`.
    ln_burst: f64,
}

impl Law {
    pub(crate) fn new(p: &IntereventLawParams) -> Self {
        let k = &p.kernel;
        Law {
            n: k.n,
            theta: k.theta,
            t0theta: k.t0theta,
            lambda: p.lambda,
            t0: k.t0(),
            ln_lambda: math::ln(p.lambda),
            ln_burst: math::ln(k.n * k.theta * k.t0theta / p.lambda),
        }
    }

    pub(crate) fn t0(&self) -> f64 {
        self.t0
    }

    /// `A(tau)` given `tau^(-theta)`.
    #[inline]
    fn a(&self, tau: f64, tau_neg_theta: f64) -> f64 {
        (1.0 - self.n) * tau + self.n * self.t0theta * tau * tau_neg_theta / (1.0 - self.theta)
    }

    #[inline]
    fn a_prime(&self, tau_neg_theta: f64) -> f64 {
        (1.0 - self.n) + self.n * self.t0theta * tau_neg_theta
    }

    pub(crate) fn pdf(&self, tau: f64) -> f64 {
        let tnt = math::powf(tau, -self.theta);
        let burst = self.n * self.theta * self.t0theta * tnt / (self.lambda * tau);
        let ap = self.a_prime(tnt);
        self.lambda * (burst + ap * ap) * math::exp(-self.lambda * self.a(tau, tnt))
    }

    pub(crate) fn survival(&self, tau: f64) -> f64 {
        let tnt = math::powf(tau, -self.theta);
        self.a_prime(tnt) * math::exp(-self.lambda * self.a(tau, tnt))
    }

    /// `ln S(tau)` given `ln tau`.
    #[inline]
    pub(crate) fn ln_survival_ln(&self, tau: f64, ln_tau: f64) -> f64 {
        let tnt = math::exp(-self.theta * ln_tau);
        math::ln(self.a_prime(tnt)) - self.lambda * self.a(tau, tnt)
    }

    pub(crate) fn ln_survival(&self, tau: f64) -> f64 {
        self.ln_survival_ln(tau, math::ln(tau))
    }

    /// `ln P(tau)` given `ln tau`; stays finite far into the tail.
    #[inline]
    pub(crate) fn ln_pdf_ln(&self, tau: f64, ln_tau: f64) -> f64 {
        let tnt = math::exp(-self.theta * ln_tau);
        let ln_burst = self.ln_burst - (1.0 + self.theta) * ln_tau;
        let ln_ap2 = 2.0 * math::ln(self.a_prime(tnt));
        self.ln_lambda + math::log_add_exp(ln_burst, ln_ap2) - self.lambda * self.a(tau, tnt)
    }

    pub(crate) fn ln_pdf(&self, tau: f64) -> f64 {
        self.ln_pdf_ln(tau, math::ln(tau))
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(Error::Domain(format!(
            "interevent time must be finite and > 0, got {tau}"
        )));
    }
    Ok(())
}

/// Interevent density `P(tau) = lambda f(lambda tau)` in 1/days.
pub fn interevent_pdf(tau: f64, p: &IntereventLawParams) -> Result<f64> {
    p.validate()?;
    check_tau(tau)?;
    Ok(Law::new(p).pdf(tau))
}

/// Closed-form antiderivative `S(tau) = A'(tau) exp(-lambda A(tau))`, with
/// `P = -dS/dtau`. Exceeds one for `tau < t0`.
pub fn interevent_survival(tau: f64, p: &IntereventLawParams) -> Result<f64> {
    p.validate()?;
    check_tau(tau)?;
    Ok(Law::new(p).survival(tau))
}

/// `ln P(tau)`, evaluated in log space.
pub fn interevent_log_pdf(tau: f64, p: &IntereventLawParams) -> Result<f64> {
    p.validate()?;
    check_tau(tau)?;
    Ok(Law::new(p).ln_pdf(tau))
}

/// Mass `1 - S(t0)` that the printed density places outside `[t0, inf)`.
pub fn normalization_deficit(p: &IntereventLawParams) -> Result<f64> {
    p.validate()?;
    let law = Law::new(p);
    Ok(-math::expm1(law.ln_survival(law.t0())))
}

/// Bisection tolerance on `tau` is this factor times `1 / lambda`.
const ROOT_TOLERANCE: f64 = 1e-10;
const ROOT_MAX_ITERATIONS: usize = 200;

/// Inverse-transform sampler for the law conditioned on `tau >= t0`.
///
/// Owns its RNG; one sampler per task.
#[derive(Debug, Clone)]
pub struct IntereventSampler {
    law: Law,
    ln_s0: f64,
    rng: ChaCha8Rng,
}

impl IntereventSampler {
    pub fn new(p: &IntereventLawParams, seed: u64) -> Result<Self> {
        p.validate()?;
        let law = Law::new(p);
        let ln_s0 = law.ln_survival(law.t0());
        Ok(IntereventSampler {
            law,
            ln_s0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    /// Draws one interevent time, always `>= t0`.
    pub fn sample(&mut self) -> Result<f64> {
        let u = math::open_unit(&mut self.rng);
        self.solve(math::ln(u))
    }

    /// Solves `ln S(tau) - ln S(t0) = ln u` for `tau >= t0`. The left side is
    /// strictly decreasing because `P > 0`.
    fn solve(&self, ln_u: f64) -> Result<f64> {
        let law = &self.law;
        let g = |tau: f64| law.ln_survival(tau) - self.ln_s0 - ln_u;
        let lo0 = law.t0();
        let tol = ROOT_TOLERANCE / law.lambda;

        let mut lo = lo0;
        let mut width = 1.0 / law.lambda;
        let mut hi = lo + width;
        let mut expansions = 0;
        while g(hi) > 0.0 {
            lo = hi;
            width *= 2.0;
            hi = lo + width;
            expansions += 1;
            if expansions > ROOT_MAX_ITERATIONS || !hi.is_finite() {
                return Err(Error::RootNotConverged {
                    iterations: expansions,
                });
            }
        }
        for _ in 0..ROOT_MAX_ITERATIONS {
            if hi - lo <= tol {
                return Ok(0.5 * (lo + hi));
            }
            let mid = 0.5 * (lo + hi);
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::RootNotConverged {
            iterations: ROOT_MAX_ITERATIONS,
        })
    }

    pub fn sample_n(&mut self, count: usize) -> Result<Vec<f64>> {
        (0..count).map(|_| self.sample()).collect()
    }

    /// CDF of the conditional law, `1 - S(tau) / S(t0)` for `tau >= t0`.
    pub fn cdf(&self, tau: f64) -> f64 {
        if tau <= self.law.t0() {
            return 0.0;
        }
        -math::expm1(self.law.ln_survival(tau) - self.ln_s0)
    }
}

/// Draws `count` interevent times from the law restricted to `tau >= t0`.
pub fn sample_interevent(p: &IntereventLawParams, count: usize, seed: u64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Domain("sample count must be >= 1".into()));
    }
    IntereventSampler::new(p, seed)?.sample_n(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;
    use proptest::prelude::*;
    use rand::Rng;

    fn params(n: f64, theta: f64, lambda: f64, t0theta: f64) -> IntereventLawParams {
        IntereventLawParams::new(n, theta, lambda, t0theta).unwrap()
    }

    /// Table 1 rows as (n, theta, lambda, t0^theta).
    const TABLE1: [(f64, f64, f64, f64); 5] = [
        (0.78, 0.077, 0.899, 0.61),
        (1.00, 0.290, 0.737, 0.41),
        (1.00, 0.267, 0.462, 0.29),
        (1.00, 0.250, 0.254, 0.15),
        (1.00, 0.203, 0.154, 0.11),
    ];

    /// Straight transcription of the printed density, used as an oracle.
    fn printed_f(tau: f64, n: f64, th: f64, lam: f64, t0t: f64) -> f64 {
        let bracket = n * th * t0t / (lam * tau.powf(1.0 + th))
            + (1.0 - n + n * t0t / tau.powf(th)).powi(2);
        let expo = -(1.0 - n) * lam * tau - n * lam * t0t / (1.0 - th) * tau.powf(1.0 - th);
        bracket * expo.exp()
    }

    #[test]
    fn poisson_reduction() {
        let p = params(0.0, 0.5, 1.0, 0.01);
        let v = interevent_pdf(0.7, &p).unwrap();
        assert!((v - 0.496_585_303_791_409_5).abs() < 1e-15);
        for i in 0..200 {
            let tau = 1e-3 * 1.05f64.powi(i);
            let lam = 2.5;
            let p = params(0.0, 0.3, lam, 0.2);
            let expect = lam * (-lam * tau).exp();
            let got = interevent_pdf(tau, &p).unwrap();
            assert!(((got - expect) / expect).abs() <= 1e-12 || expect == 0.0);
        }
    }

    #[test]
    fn table_row_two_density() {
        let p = params(1.0, 0.29, 0.737, 0.41);
        let v = interevent_pdf(1.0, &p).unwrap();
        let oracle = 0.737 * printed_f(1.0, 1.0, 0.29, 0.737, 0.41);
        assert!((v - oracle).abs() < 1e-14);
        assert!((v - 0.1586).abs() < 5e-5);
    }

    #[test]
    fn matches_printed_formula_on_table_rows() {
        for &(n, th, lam, t0t) in &TABLE1 {
            let p = params(n, th, lam, t0t);
            for i in 0..60 {
                let tau = 1e-2 * 1.25f64.powi(i);
                let want = lam * printed_f(tau, n, th, lam, t0t);
                let got = interevent_pdf(tau, &p).unwrap();
                if want == 0.0 {
                    assert_eq!(got, 0.0);
                    continue;
                }
                // Far in the tail the exponent is large and its rounding is
                // amplified by exp, so the tolerance scales with it.
                let tol = 1e-13 * (1.0 + want.ln().abs());
                assert!(((got - want) / want).abs() < tol, "tau={tau} got={got} want={want}");
            }
        }
    }

    #[test]
    fn density_is_negative_survival_derivative() {
        for &(n, th, lam, t0t) in &TABLE1 {
            let p = params(n, th, lam, t0t);
            let t0 = p.t0();
            let (lo, hi) = (t0.ln(), (10.0 / lam).ln());
            for i in 0..50 {
                let tau = (lo + (hi - lo) * i as f64 / 49.0).exp();
                let h = 1e-4 * tau;
                let fd = -(interevent_survival(tau + h, &p).unwrap()
                    - interevent_survival(tau - h, &p).unwrap())
                    / (2.0 * h);
                let pdf = interevent_pdf(tau, &p).unwrap();
                assert!(((fd - pdf) / pdf).abs() < 1e-5, "tau={tau} fd={fd} pdf={pdf}");
            }
        }
    }

    #[test]
    fn survival_examples() {
        let p = params(0.0, 0.5, 2.0, 0.1);
        assert!((interevent_survival(1.0, &p).unwrap() - (-2.0f64).exp()).abs() < 1e-15);

        let p = params(1.0, 0.29, 0.737, 0.41);
        let t0 = p.t0();
        assert!((t0 - 0.0462).abs() < 1e-4);
        let s0 = interevent_survival(t0, &p).unwrap();
        assert!((s0 - (-0.737 * t0 / 0.71f64).exp()).abs() < 1e-12);
        assert!((s0 - 0.953).abs() < 5e-4);

        let p = params(0.6, 0.4, 0.5, 0.3);
        let t0 = p.t0();
        let expect = (-0.5 * (0.4 * t0 + 0.6 * t0 / 0.6)).exp();
        assert!((interevent_survival(t0, &p).unwrap() - expect).abs() < 1e-12);
        // Above one below the microscale.
        assert!(interevent_survival(0.1 * t0, &p).unwrap() > 1.0);
    }

    #[test]
    fn log_pdf_examples() {
        let p = params(0.0, 0.5, 1.0, 0.3);
        assert_eq!(interevent_log_pdf(5.0, &p).unwrap(), -5.0);

        let p = params(1.0, 0.25, 0.254, 0.15);
        let v = interevent_log_pdf(1e5, &p).unwrap();
        assert!(v.is_finite());
        for lam in [0.05, 0.9] {
            let p = params(0.7, 0.3, lam, 0.3);
            assert!(interevent_log_pdf(1e6 / lam, &p).unwrap().is_finite());
        }
    }

    #[test]
    fn log_pdf_matches_pdf() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let p = params(
                rng.random_range(0.0..=1.0),
                rng.random_range(0.05..0.95),
                rng.random_range(0.05..2.0),
                rng.random_range(0.05..1.0),
            );
            let tau = 10f64.powf(rng.random_range(-2.0..2.0));
            let direct = interevent_pdf(tau, &p).unwrap();
            let via_log = interevent_log_pdf(tau, &p).unwrap().exp();
            assert!(((via_log - direct) / direct).abs() < 1e-10);
        }
    }

    #[test]
    fn domain_errors() {
        let p = params(0.5, 0.3, 1.0, 0.3);
        assert!(matches!(interevent_pdf(0.0, &p), Err(Error::Domain(_))));
        assert!(matches!(interevent_survival(-1.0, &p), Err(Error::Domain(_))));
        assert!(IntereventLawParams::new(0.5, 1.0, 1.0, 0.3).is_err());
        assert!(IntereventLawParams::new(1.1, 0.3, 1.0, 0.3).is_err());
        assert!(IntereventLawParams::new(0.5, 0.3, 0.0, 0.3).is_err());
    }

    #[test]
    fn deficit_examples() {
        let p = params(0.0, 0.5, 0.8, 0.2);
        let t0 = p.t0();
        let d = normalization_deficit(&p).unwrap();
        assert!((d - (1.0 - (-0.8 * t0).exp())).abs() < 1e-15);

        let p = params(1.0, 0.29, 0.737, 0.41);
        assert!((normalization_deficit(&p).unwrap() - 0.047).abs() < 1e-3);

        let p = params(1.0, 0.29, 1e-12, 0.41);
        assert!(normalization_deficit(&p).unwrap() < 1e-12);
    }

    /// Composite Simpson on `ln tau` over `[lo, hi]`.
    fn quad_pdf(p: &IntereventLawParams, lo: f64, hi: f64, panels: usize) -> f64 {
        let (a, b) = (lo.ln(), hi.ln());
        let h = (b - a) / panels as f64;
        let g = |s: f64| {
            let t = s.exp();
            interevent_pdf(t, p).unwrap() * t
        };
        let mut acc = g(a) + g(b);
        for i in 1..panels {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * g(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn mass_identity() {
        for &(n, th, lam, t0t) in &TABLE1 {
            let p = params(n, th, lam, t0t);
            let (lo, hi) = (p.t0(), 1e4 / lam);
            let mass = quad_pdf(&p, lo, hi, 20_000);
            let expect =
                interevent_survival(lo, &p).unwrap() - interevent_survival(hi, &p).unwrap();
            assert!((mass - expect).abs() < 1e-6, "mass={mass} expect={expect}");
        }
    }

    #[test]
    fn asymptotic_log_slope() {
        for n in [0.0, 0.4, 0.8] {
            let lam = 0.6;
            // A small t0^theta keeps the stretched tau^(1 - theta) term of the
            // exponent from steepening the slope inside the window.
            let p = params(n, 0.3, lam, 0.05);
            let (a, b) = (100.0 / lam, 1000.0 / lam);
            let slope = (interevent_log_pdf(b, &p).unwrap() - interevent_log_pdf(a, &p).unwrap())
                / (b - a);
            let want = -(1.0 - n) * lam;
            assert!(((slope - want) / want).abs() < 0.05, "n={n} slope={slope}");
        }
    }

    #[test]
    fn exponential_sample_mean() {
        let p = params(0.0, 0.5, 1.0, 0.01);
        let xs = sample_interevent(&p, 100_000, 17).unwrap();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 1.0).abs() < 0.02, "mean={mean}");
    }

    #[test]
    fn sampler_matches_own_cdf() {
        let p = params(1.0, 0.29, 0.737, 0.41);
        let mut sampler = IntereventSampler::new(&p, 5).unwrap();
        let xs = sampler.sample_n(10_000).unwrap();
        let t0 = p.t0();
        assert!(xs.iter().all(|&x| x >= t0));
        let ks = stats::ks_one_sample(&xs, |x| sampler.cdf(x)).unwrap();
        assert!(ks.p_value > 0.01, "{ks:?}");
    }

    #[test]
    fn sampler_is_deterministic() {
        let p = params(0.8, 0.3, 0.5, 0.3);
        assert_eq!(
            sample_interevent(&p, 50, 9).unwrap(),
            sample_interevent(&p, 50, 9).unwrap()
        );
        assert_ne!(
            sample_interevent(&p, 50, 9).unwrap(),
            sample_interevent(&p, 50, 10).unwrap()
        );
        assert!(sample_interevent(&p, 0, 9).is_err());
    }

    proptest! {
        #[test]
        fn density_positive(
            n in 0.0f64..=1.0,
            theta in 0.01f64..0.99,
            lambda in 1e-3f64..10.0,
            t0theta in 1e-3f64..2.0,
            ln_tau in -10.0f64..8.0,
        ) {
            let p = params(n, theta, lambda, t0theta);
            let tau = ln_tau.exp();
            prop_assert!(interevent_log_pdf(tau, &p).unwrap().is_finite());
            let v = interevent_pdf(tau, &p).unwrap();
            prop_assert!(v > 0.0 || interevent_log_pdf(tau, &p).unwrap() < -700.0);
        }
    }
}
