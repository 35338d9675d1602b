//! Lagged two-point correlation estimators over aligned panels.
//!
//! The raw statistic is the uncentered time average of
//! `x1(t + lag) * x2(t)`: deliberately not mean-subtracted, so a drift
//! registers as non-zero autocorrelation. The normalized form divides by
//! the geometric mean of the columns' uncentered second moments, computed
//! once over the full panel (never per-lag-overlap); with that convention
//! the lag-zero autocorrelation is exactly one even for drifting series.
//!
//! Lags count panel rows, not wall-clock hours: hours that failed the
//! liquidity filter do not exist in the series.
//!
//! Everything here is a pure function over an immutable panel; sweeps over
//! (pair, lag) tasks can run concurrently.

use std::io::Write;

use chrono::{DateTime, Utc};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::marketdata::AlignedPanel;

/// Correlation at one signed lag, with the null-hypothesis standard error
/// `1 / sqrt(pair_count)` attached to the normalized value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LagCorrelation {
    /// Bar units; positive lag means the first series' datum is later.
    pub lag: i64,
    /// Units of return squared.
    pub raw: f64,
    pub normalized: f64,
    pub std_error: f64,
    /// Exact number of (t + lag, t) pairs used; shrinks with |lag|.
    pub pair_count: usize,
}

/// Correlation at every lag in `-max_lag..=max_lag` for one ordered pair.
/// The convention is `lag = t(x1) - t(x2)`: the value at `+1` pairs each
/// x2 datum with the x1 datum one bar later.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationFunction {
    pub x1: String,
    pub x2: String,
    pub lags: Vec<LagCorrelation>,
    pub window: (DateTime<Utc>, DateTime<Utc>),
    pub panel_hash: String,
}

/// Uncentered average of `x_i(t + lag) * x_j(t)` over the rows where both
/// indices are in range, plus the exact pair count.
pub fn raw_correlation(
    panel: &AlignedPanel,
    i: usize,
    j: usize,
    lag: i64,
) -> Result<(f64, usize)> {
    let rows = panel.n_rows() as i64;
    if lag.abs() >= rows {
        return Err(Error::InsufficientData {
            context: format!("lag {lag} on a {rows}-row panel"),
            needed: (lag.unsigned_abs() as usize) + 1,
            got: rows as usize,
        });
    }
    let t_lo = 0.max(-lag) as usize;
    let t_hi = (rows.min(rows - lag)) as usize;
    let mut sum = 0.0;
    for t in t_lo..t_hi {
        sum += panel.value((t as i64 + lag) as usize, i) * panel.value(t, j);
    }
    let count = t_hi - t_lo;
    Ok((sum / count as f64, count))
}

/// Uncentered second moment of one column over the full panel.
fn second_moment(panel: &AlignedPanel, col: usize) -> f64 {
    let mut sum = 0.0;
    for t in 0..panel.n_rows() {
        let v = panel.value(t, col);
        sum += v * v;
    }
    sum / panel.n_rows() as f64
}

/// Normalized lagged correlation between columns `i` (x1) and `j` (x2).
pub fn normalized_correlation(
    panel: &AlignedPanel,
    i: usize,
    j: usize,
    lag: i64,
) -> Result<LagCorrelation> {
    let (raw, pair_count) = raw_correlation(panel, i, j, lag)?;
    let mut norm = 1.0;
    for col in [i, j] {
        let m2 = second_moment(panel, col);
        if !(m2 > 0.0) {
            return Err(Error::DegenerateSeries {
                instrument: panel.instruments()[col].clone(),
            });
        }
        norm *= m2;
    }
    Ok(LagCorrelation {
        lag,
        raw,
        normalized: raw / norm.sqrt(),
        std_error: 1.0 / (pair_count as f64).sqrt(),
        pair_count,
    })
}

/// Full correlation function over `-max_lag..=max_lag`, ordered by lag.
pub fn correlation_function(
    panel: &AlignedPanel,
    i: usize,
    j: usize,
    max_lag: i64,
) -> Result<CorrelationFunction> {
    if max_lag < 1 {
        return Err(Error::Validation(format!(
            "max_lag must be at least 1, got {max_lag}"
        )));
    }
    let rows = panel.n_rows() as i64;
    if rows <= 2 * max_lag {
        return Err(Error::InsufficientData {
            context: format!("correlation function to lag {max_lag}"),
            needed: (2 * max_lag + 1) as usize,
            got: rows as usize,
        });
    }
    let lags = (-max_lag..=max_lag)
        .map(|lag| normalized_correlation(panel, i, j, lag))
        .collect::<Result<Vec<_>>>()?;
    Ok(CorrelationFunction {
        x1: panel.instruments()[i].clone(),
        x2: panel.instruments()[j].clone(),
        lags,
        window: panel.window(),
        panel_hash: panel.hash_hex(),
    })
}

impl CorrelationFunction {
    /// Plot-ready CSV: `lag,raw,normalized,std_error,pair_count`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "lag,raw,normalized,std_error,pair_count")?;
        for l in &self.lags {
            writeln!(
                w,
                "{},{},{},{},{}",
                l.lag, l.raw, l.normalized, l.std_error, l.pair_count
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("correlation function serializes")
    }
}
