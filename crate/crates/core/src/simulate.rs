//! Exact simulation of the Omori-kernel Hawkes process on `[0, T]`.
//!
//! Two independent algorithms are provided so that each can serve as an
//! oracle for the other:
//!
//! - [`simulate_thinning`]: Ogata thinning. The kernel is monotone decreasing,
//!   so the intensity just after the latest accepted or rejected point bounds
//!   the intensity until the next event.
//! - [`simulate_branching`]: cluster construction. Immigrants arrive as a
//!   Poisson process of rate `omega`; every event has `Poisson(n)` children
//!   whose lags follow the normalized Omori-Utsu law.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::kernel::{intensity_at, EventSeries, Omori, SimulationParams};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimulationReport {
    pub event_count: usize,
    /// Events per day over the horizon.
    pub realized_rate: f64,
    /// Number of generations produced (branching only).
    pub generations: Option<usize>,
    pub cap_hit: bool,
    /// False for `n >= 1`, where the process has no stationary rate.
    pub stationary: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub events: EventSeries,
    pub report: SimulationReport,
}

fn resolve_cap(sp: &SimulationParams, cap: Option<usize>) -> Result<usize> {
    sp.validate()?;
    match cap {
        Some(0) => Err(Error::Domain("event cap must be >= 1".into())),
        Some(c) => Ok(c),
        None if sp.kernel.n >= 1.0 => Err(Error::param(
            "n",
            sp.kernel.n,
            "critical or supercritical branching ratio requires an explicit event cap",
        )),
        None => Ok(usize::MAX),
    }
}

fn finish(mut times: Vec<f64>, sp: &SimulationParams, cap_hit: bool, generations: Option<usize>) -> Result<Simulation> {
    times.sort_by(f64::total_cmp);
    // Coincident times need a lag below one ulp of t; drop them rather than
    // break strict ordering.
    times.dedup();
    let events = EventSeries::new(times, sp.horizon)?;
    let report = SimulationReport {
        event_count: events.len(),
        realized_rate: events.len() as f64 / sp.horizon,
        generations,
        cap_hit,
        stationary: sp.kernel.n < 1.0,
    };
    Ok(Simulation { events, report })
}

/// Ogata thinning. With `cap` set, stops after that many events and flags it.
/// `cap` is mandatory when `n >= 1`.
pub fn simulate_thinning(sp: &SimulationParams, cap: Option<usize>) -> Result<Simulation> {
    let cap = resolve_cap(sp, cap)?;
    let kernel = Omori::new(&sp.kernel);
    let (omega, n, horizon) = (sp.omega, sp.kernel.n, sp.horizon);
    let jump = n * kernel.pdf(0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(sp.seed);

    let mut times: Vec<f64> = Vec::new();
    let mut t = 0.0;
    let mut bound = omega;
    let mut cap_hit = false;
    loop {
        t += -math::ln(math::open_unit(&mut rng)) / bound;
        if t > horizon {
            break;
        }
        let intensity = intensity_at(t, &times, omega, n, &kernel);
        debug_assert!(
            intensity <= bound * (1.0 + 1e-9),
            "thinning bound {bound} below intensity {intensity} at t = {t}"
        );
        if math::open_unit(&mut rng) * bound <= intensity {
            times.push(t);
            if times.len() >= cap {
                cap_hit = true;
                break;
            }
            bound = intensity + jump;
        } else {
            bound = intensity;
        }
    }
    finish(times, sp, cap_hit, None)
}

/// Draws from `Poisson(mean)` by sequential inversion; fine for the small
/// means used for offspring counts.
fn poisson_small(mean: f64, rng: &mut ChaCha8Rng) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let u = math::open_unit(rng);
    let mut k = 0;
    let mut p = math::exp(-mean);
    let mut cdf = p;
    while u > cdf && p > 0.0 {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
    }
    k
}

/// Generation-by-generation cluster simulation. Children are drawn breadth
/// first, parents in time order, so the RNG stream is consumed in a fixed order.
pub fn simulate_branching(sp: &SimulationParams, cap: Option<usize>) -> Result<Simulation> {
    let cap = resolve_cap(sp, cap)?;
    let kernel = Omori::new(&sp.kernel);
    let (omega, n, horizon) = (sp.omega, sp.kernel.n, sp.horizon);
    let mut rng = ChaCha8Rng::seed_from_u64(sp.seed);

    let mut all: Vec<f64> = Vec::new();
    let mut generation: Vec<f64> = Vec::new();
    let mut t = 0.0;
    loop {
        t += -math::ln(math::open_unit(&mut rng)) / omega;
        if t > horizon {
            break;
        }
        generation.push(t);
    }

    let mut cap_hit = false;
    let mut generations = 0;
    while !generation.is_empty() {
        generations += 1;
        let room = cap - all.len();
        all.extend_from_slice(&generation[..room.min(generation.len())]);
        if all.len() >= cap {
            cap_hit = true;
            break;
        }
        let mut children = Vec::new();
        for &parent in &generation {
            for _ in 0..poisson_small(n, &mut rng) {
                let child = parent + kernel.inverse_cdf(math::open_unit(&mut rng));
                if child <= horizon {
                    children.push(child);
                }
            }
        }
        children.sort_by(f64::total_cmp);
        generation = children;
    }
    finish(all, sp, cap_hit, Some(generations))
}
