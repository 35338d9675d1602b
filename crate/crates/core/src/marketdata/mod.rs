//! Ingestion layer: ticks, bars, log-returns with rollover handling, and
//! the aligned multi-instrument panel every estimator consumes.
//!
//! Per-instrument ingestion is independent (all types here are immutable
//! once built); panel alignment is a single merge over sorted inputs.

mod bars;
mod csvio;
mod panel;
mod returns;

pub use bars::{aggregate_ticks, volume_profile, CalendarBucket, VolumeBucket};
pub use csvio::{
    read_bars, read_rollover_calendar, read_ticks, write_bars, write_ticks, BAR_HEADER,
    CALENDAR_HEADER, TICK_HEADER,
};
pub use panel::{align_panel, AlignedPanel};
pub use returns::{compute_returns, filter_max_gap, RolloverCalendar};

use chrono::{DateTime, TimeDelta, Utc};

use crate::error::{Error, Result};

/// One trade: the finest-grained observation the pipeline accepts.
#[derive(Debug, Clone, PartialEq)]
pub struct Tick {
    pub instrument: String,
    /// Specific expiry code; changes at rollover.
    pub contract: String,
    /// UTC, millisecond precision.
    pub timestamp: DateTime<Utc>,
    pub price: f64,
    /// Contracts traded; zero is legal (e.g. technical prints).
    pub volume: u64,
}

impl Tick {
    pub fn validate(&self) -> Result<()> {
        if !(self.price > 0.0) || !self.price.is_finite() {
            return Err(Error::Validation(format!(
                "tick for {}/{} at {} has non-positive price {}",
                self.instrument, self.contract, self.timestamp, self.price
            )));
        }
        Ok(())
    }
}

/// One aggregated OHLCV observation for one instrument at one timestamp.
/// Bars exist only where trades occurred, so `volume >= 1` and
/// `tick_count >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub instrument: String,
    pub contract: String,
    pub interval_start: DateTime<Utc>,
    pub interval: TimeDelta,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub volume: u64,
    pub tick_count: u64,
}

impl Bar {
    /// Close time labels the return computed from this bar.
    pub fn close_time(&self) -> DateTime<Utc> {
        self.interval_start + self.interval
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.low > 0.0
            && self.low <= self.open.min(self.close)
            && self.open.max(self.close) <= self.high
            && [self.open, self.high, self.low, self.close]
                .iter()
                .all(|p| p.is_finite());
        if !ok {
            return Err(Error::Validation(format!(
                "bar for {} at {} violates OHLC ordering: o={} h={} l={} c={}",
                self.instrument, self.interval_start, self.open, self.high, self.low, self.close
            )));
        }
        if self.volume < 1 || self.tick_count < 1 {
            return Err(Error::Validation(format!(
                "bar for {} at {} has volume {} / tick_count {}; bars exist only where trades occurred",
                self.instrument, self.interval_start, self.volume, self.tick_count
            )));
        }
        if self.interval <= TimeDelta::zero() {
            return Err(Error::Validation(format!(
                "bar for {} at {} has non-positive interval",
                self.instrument, self.interval_start
            )));
        }
        Ok(())
    }
}

/// A single log-return, stamped with the close time of the later bar.
///
/// `rollover_affected` observations are carried through so callers can
/// count them, but they never enter a panel or any estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnObservation {
    pub instrument: String,
    pub timestamp: DateTime<Utc>,
    pub log_return: f64,
    /// Actual close-to-close gap; one bar interval when no hours are missing.
    pub delta_t: TimeDelta,
    pub rollover_affected: bool,
}
