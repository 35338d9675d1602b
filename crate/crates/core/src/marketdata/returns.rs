use std::collections::HashMap;

use chrono::{DateTime, TimeDelta, Utc};

use crate::error::{Error, Result};

use super::{Bar, ReturnObservation};

/// Scheduled contract switches per instrument. A return whose close-to-close
/// span contains a switch is rollover-affected; so is any return whose two
/// bars carry different contract codes, calendar or not.
#[derive(Debug, Clone, Default)]
pub struct RolloverCalendar {
    switches: HashMap<String, Vec<DateTime<Utc>>>,
}

impl RolloverCalendar {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(entries: impl IntoIterator<Item = (String, DateTime<Utc>)>) -> Self {
        let mut switches: HashMap<String, Vec<DateTime<Utc>>> = HashMap::new();
        for (instrument, ts) in entries {
            switches.entry(instrument).or_default().push(ts);
        }
        for list in switches.values_mut() {
            list.sort();
        }
        Self { switches }
    }

    pub fn len(&self) -> usize {
        self.switches.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.switches.is_empty()
    }

    /// True when a switch for `instrument` falls in (prev_close, close].
    /// A switch stamped exactly on a bar close affects the return ending
    /// there, not the one starting there.
    pub fn affects(
        &self,
        instrument: &str,
        prev_close: DateTime<Utc>,
        close: DateTime<Utc>,
    ) -> bool {
        self.switches
            .get(instrument)
            .map(|list| {
                let from = list.partition_point(|&s| s <= prev_close);
                list[from..].iter().any(|&s| s <= close)
            })
            .unwrap_or(false)
    }
}

/// Close-to-close log-returns for one instrument's bar series.
///
/// Bars must all belong to one instrument and be sorted by interval start;
/// gaps are allowed and recorded in `delta_t`. Pairs of bars sharing a
/// close time (a mid-interval contract switch produces two bars in one
/// interval) admit no well-defined return and are skipped.
pub fn compute_returns(bars: &[Bar], calendar: &RolloverCalendar) -> Result<Vec<ReturnObservation>> {
    if bars.len() < 2 {
        return Ok(Vec::new());
    }
    let instrument = &bars[0].instrument;
    for pair in bars.windows(2) {
        if pair[1].instrument != *instrument {
            return Err(Error::Validation(format!(
                "compute_returns expects a single instrument, got {} and {}",
                instrument, pair[1].instrument
            )));
        }
        if pair[1].interval_start < pair[0].interval_start {
            return Err(Error::Unsorted {
                instrument: instrument.clone(),
                contract: pair[1].contract.clone(),
                prev: pair[0].interval_start.to_rfc3339(),
                next: pair[1].interval_start.to_rfc3339(),
            });
        }
    }

    let mut out = Vec::with_capacity(bars.len() - 1);
    for pair in bars.windows(2) {
        let (prev, curr) = (&pair[0], &pair[1]);
        for bar in [prev, curr] {
            if !(bar.close > 0.0) || !bar.close.is_finite() {
                return Err(Error::Validation(format!(
                    "bar for {} at {} has non-positive close {}",
                    bar.instrument, bar.interval_start, bar.close
                )));
            }
        }
        let delta_t = curr.close_time() - prev.close_time();
        if delta_t <= TimeDelta::zero() {
            continue;
        }
        let rollover_affected = prev.contract != curr.contract
            || calendar.affects(instrument, prev.close_time(), curr.close_time());
        out.push(ReturnObservation {
            instrument: instrument.clone(),
            timestamp: curr.close_time(),
            log_return: (curr.close / prev.close).ln(),
            delta_t,
            rollover_affected,
        });
    }
    Ok(out)
}

/// Drop returns spanning a gap longer than `max_gap`. Rollover flags are
/// untouched; this is the opt-in gap control.
pub fn filter_max_gap(
    observations: Vec<ReturnObservation>,
    max_gap: TimeDelta,
) -> Vec<ReturnObservation> {
    observations
        .into_iter()
        .filter(|o| o.delta_t <= max_gap)
        .collect()
}
