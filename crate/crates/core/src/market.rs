//! From daily closing prices to loss-exceedance interevent times.
//!
//! Returns are log-returns of consecutive usable closes. Day `i` is an
//! exceedance when `r_i < -q` (strict). Time is the trading-day row index,
//! so interevent times are whole numbers of trading days.

use alloc::format;
use alloc::vec::Vec;

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::kernel::EventSeries;
use crate::math;

/// One input row; `close` is `None` when the source value was blank or unparsable.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PriceRow {
    pub date: NaiveDate,
    pub close: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DropReason {
    Missing,
    NonFinite,
    NonPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DroppedRow {
    /// Position in the input rows.
    pub index: usize,
    pub date: NaiveDate,
    pub reason: DropReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CleaningReport {
    pub input_rows: usize,
    pub dropped: Vec<DroppedRow>,
}

/// Dated log-returns. `dates[i]` is the date of the later close of return `i`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReturnSeries {
    dates: Vec<NaiveDate>,
    returns: Vec<f64>,
}

impl ReturnSeries {
    pub fn new(dates: Vec<NaiveDate>, returns: Vec<f64>) -> Result<Self> {
        if dates.len() != returns.len() {
            return Err(Error::Data(format!(
                "{} dates for {} returns",
                dates.len(),
                returns.len()
            )));
        }
        if returns.is_empty() {
            return Err(Error::InsufficientData {
                needed: 1,
                found: 0,
            });
        }
        if dates.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Data("return dates must be strictly increasing".into()));
        }
        if returns.iter().any(|r| !r.is_finite()) {
            return Err(Error::Data("returns must be finite".into()));
        }
        Ok(ReturnSeries { dates, returns })
    }

    /// Undated returns, e.g. synthetic data; dates count days from 2000-01-01.
    pub fn from_returns(returns: Vec<f64>) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
        let dates = (0..returns.len())
            .map(|i| {
                start
                    .checked_add_days(chrono::Days::new(i as u64))
                    .ok_or_else(|| Error::Data("date overflow".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dates, returns)
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }
}

/// Log-returns `ln(p_i / p_{i-1})` over consecutive usable closes. Rows with
/// missing, non-finite or non-positive closes are dropped and reported.
pub fn prices_to_returns(rows: &[PriceRow]) -> Result<(ReturnSeries, CleaningReport)> {
    if let Some(i) = rows.windows(2).position(|w| w[1].date <= w[0].date) {
        return Err(Error::Data(format!(
            "dates must be strictly increasing (row {} on {})",
            i + 1,
            rows[i + 1].date
        )));
    }
    let mut report = CleaningReport {
        input_rows: rows.len(),
        dropped: Vec::new(),
    };
    let mut usable: Vec<(NaiveDate, f64)> = Vec::with_capacity(rows.len());
    for (index, row) in rows.iter().enumerate() {
        let reason = match row.close {
            None => Some(DropReason::Missing),
            Some(c) if !c.is_finite() => Some(DropReason::NonFinite),
            Some(c) if c <= 0.0 => Some(DropReason::NonPositive),
            Some(_) => None,
        };
        match (reason, row.close) {
            (Some(reason), _) => report.dropped.push(DroppedRow {
                index,
                date: row.date,
                reason,
            }),
            (None, Some(c)) => usable.push((row.date, c)),
            (None, None) => unreachable!(),
        }
    }
    if usable.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            found: usable.len(),
        });
    }
    let (dates, returns) = usable
        .windows(2)
        .map(|w| (w[1].0, math::ln(w[1].1 / w[0].1)))
        .unzip();
    Ok((ReturnSeries::new(dates, returns)?, report))
}

fn check_threshold(q: f64) -> Result<()> {
    if !(q.is_finite() && q > 0.0) {
        return Err(Error::param("q", q, "threshold must be finite and > 0"));
    }
    Ok(())
}

/// Exceedance days `r_i < -q` as an event series in trading-day units on
/// `[0, len - 1]`. An empty result is legal.
pub fn extract_exceedances(rs: &ReturnSeries, q: f64) -> Result<EventSeries> {
    check_threshold(q)?;
    let times = rs
        .returns
        .iter()
        .enumerate()
        .filter(|(_, &r)| r < -q)
        .map(|(i, _)| i as f64)
        .collect();
    EventSeries::new(times, (rs.len() - 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThresholdChoice {
    pub q: f64,
    /// Mean interevent time of the exceedances at `q`, in trading days.
    pub achieved_mean: f64,
    pub event_count: usize,
}

pub const MIN_EVENTS: usize = 30;

/// Threshold whose exceedances have the mean interevent time closest to
/// `target_mean`, among thresholds leaving at least [`MIN_EVENTS`] events.
pub fn find_threshold(rs: &ReturnSeries, target_mean: f64) -> Result<ThresholdChoice> {
    find_threshold_with(rs, target_mean, MIN_EVENTS)
}

/// [`find_threshold`] with a custom minimum event count (at least 2).
///
/// The candidates are the distinct loss magnitudes `m` (events: losses
/// strictly larger than `m`) plus half the smallest magnitude, which admits
/// every loss. Ties in `|achieved - target|` go to the smaller `q`.
pub fn find_threshold_with(
    rs: &ReturnSeries,
    target_mean: f64,
    min_events: usize,
) -> Result<ThresholdChoice> {
    if !(target_mean.is_finite() && target_mean >= 1.0) {
        return Err(Error::Domain(format!(
            "target mean interevent time must be >= 1, got {target_mean}"
        )));
    }
    let min_events = min_events.max(2);
    // (magnitude, index) of every loss, largest first.
    let mut losses: Vec<(f64, usize)> = rs
        .returns
        .iter()
        .enumerate()
        .filter(|(_, &r)| r < 0.0)
        .map(|(i, &r)| (-r, i))
        .collect();
    losses.sort_by(|a, b| b.0.total_cmp(&a.0));

    let mut best: Option<ThresholdChoice> = None;
    let mut consider = |q: f64, count: usize, first: usize, last: usize| {
        if count < min_events {
            return;
        }
        let mean = (last - first) as f64 / (count - 1) as f64;
        let gap = (mean - target_mean).abs();
        // Candidates arrive in decreasing q, so `<=` keeps the smaller q on ties.
        if best.is_none_or(|b| gap <= (b.achieved_mean - target_mean).abs()) {
            best = Some(ThresholdChoice {
                q,
                achieved_mean: mean,
                event_count: count,
            });
        }
    };

    let (mut count, mut first, mut last) = (0usize, usize::MAX, 0usize);
    let mut i = 0;
    while i < losses.len() {
        let m = losses[i].0;
        // Threshold m: events are the losses already absorbed (all larger than m).
        consider(m, count, first, last);
        while i < losses.len() && losses[i].0 == m {
            let idx = losses[i].1;
            count += 1;
            first = first.min(idx);
            last = last.max(idx);
            i += 1;
        }
    }
    if let Some(&(smallest, _)) = losses.last() {
        consider(0.5 * smallest, count, first, last);
    }
    best.ok_or(Error::InsufficientData {
        needed: min_events,
        found: count,
    })
}

/// Log-binned density estimate of interevent times.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EmpiricalPdf {
    /// `len = densities.len() + 1`, strictly increasing; bins are `[e_k, e_{k+1})`.
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub counts: Vec<usize>,
    pub mean_interevent: f64,
    /// Set when all durations are identical and the estimate is a single bin.
    pub degenerate: bool,
}

impl EmpiricalPdf {
    /// Geometric bin centers.
    pub fn centers(&self) -> Vec<f64> {
        self.bin_edges
            .windows(2)
            .map(|w| math::sqrt(w[0] * w[1]))
            .collect()
    }

    pub fn widths(&self) -> Vec<f64> {
        self.bin_edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `sum density * width`; one for a freshly built estimate.
    pub fn total_mass(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.widths())
            .map(|(d, w)| d * w)
            .sum()
    }
}

/// Log-spaced histogram from the smallest duration upwards with
/// `bins_per_decade` bins per factor of ten; empty bins are kept.
pub fn empirical_pdf(durations: &[f64], bins_per_decade: usize) -> Result<EmpiricalPdf> {
    if bins_per_decade == 0 {
        return Err(Error::Domain("bins_per_decade must be >= 1".into()));
    }
    if durations.is_empty() {
        return Err(Error::InsufficientData {
            needed: 1,
            found: 0,
        });
    }
    if let Some(bad) = durations.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(Error::Data(format!("durations must be finite and > 0, found {bad}")));
    }
    let lo = durations.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = durations.iter().copied().fold(0.0, f64::max);
    let per = bins_per_decade as f64;
    let edge = |k: usize| lo * math::powf(10.0, k as f64 / per);

    let mut bin_edges = vec_with_first(lo);
    let mut k = 1;
    loop {
        let e = edge(k);
        bin_edges.push(e);
        if e > hi {
            break;
        }
        k += 1;
    }
    let bins = bin_edges.len() - 1;
    let mut counts = alloc::vec![0usize; bins];
    for &d in durations {
        // First edge strictly above d closes the bin containing d.
        let upper = bin_edges.partition_point(|&e| e <= d);
        counts[upper - 1] += 1;
    }
    let total = durations.len() as f64;
    let densities = counts
        .iter()
        .zip(bin_edges.windows(2))
        .map(|(&c, w)| c as f64 / (total * (w[1] - w[0])))
        .collect();
    Ok(EmpiricalPdf {
        bin_edges,
        densities,
        counts,
        mean_interevent: durations.iter().sum::<f64>() / total,
        degenerate: lo == hi,
    })
}

fn vec_with_first(x: f64) -> Vec<f64> {
    let mut v = Vec::with_capacity(32);
    v.push(x);
    v
}

/// Rescales to `x = lambda tau`, `y = P / lambda` so curves for different
/// rates can be overlaid. Area is preserved.
pub fn rescale_for_collapse(e: &EmpiricalPdf, lambda: f64) -> Result<EmpiricalPdf> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::param("lambda", lambda, "must be finite and > 0"));
    }
    Ok(EmpiricalPdf {
        bin_edges: e.bin_edges.iter().map(|x| x * lambda).collect(),
        densities: e.densities.iter().map(|y| y / lambda).collect(),
        counts: e.counts.clone(),
        mean_interevent: e.mean_interevent * lambda,
        degenerate: e.degenerate,
    })
}
