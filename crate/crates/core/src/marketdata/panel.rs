use std::collections::BTreeMap;

use chrono::{DateTime, Utc};

use crate::error::{Error, Result};

use super::ReturnObservation;

/// Matrix of simultaneous returns: one row per timestamp at which every
/// tracked instrument has a valid, non-rollover return. This encodes the
/// liquidity requirement: an hour missing in any one market drops that
/// hour for all of them.
///
/// Rows are strictly increasing in time. A single-instrument panel is
/// legal for autocorrelation-only work.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedPanel {
    instruments: Vec<String>,
    timestamps: Vec<DateTime<Utc>>,
    /// Row-major, `timestamps.len() x instruments.len()`.
    values: Vec<f64>,
    window: (DateTime<Utc>, DateTime<Utc>),
}

impl AlignedPanel {
    pub fn new(
        instruments: Vec<String>,
        timestamps: Vec<DateTime<Utc>>,
        values: Vec<f64>,
        window: (DateTime<Utc>, DateTime<Utc>),
    ) -> Result<Self> {
        if instruments.is_empty() {
            return Err(Error::Validation("panel needs at least one instrument".into()));
        }
        if timestamps.is_empty() {
            return Err(Error::EmptyPanel);
        }
        if values.len() != instruments.len() * timestamps.len() {
            return Err(Error::Validation(format!(
                "panel shape mismatch: {} values for {} rows x {} columns",
                values.len(),
                timestamps.len(),
                instruments.len()
            )));
        }
        for pair in timestamps.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::Validation(format!(
                    "panel timestamps must be strictly increasing: {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("panel contains non-finite return {v}")));
        }
        Ok(Self {
            instruments,
            timestamps,
            values,
            window,
        })
    }

    pub fn n_instruments(&self) -> usize {
        self.instruments.len()
    }

    pub fn n_rows(&self) -> usize {
        self.timestamps.len()
    }

    pub fn instruments(&self) -> &[String] {
        &self.instruments
    }

    pub fn timestamps(&self) -> &[DateTime<Utc>] {
        &self.timestamps
    }

    pub fn window(&self) -> (DateTime<Utc>, DateTime<Utc>) {
        self.window
    }

    pub fn column_index(&self, instrument: &str) -> Option<usize> {
        self.instruments.iter().position(|i| i == instrument)
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.instruments.len() + col]
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = f64> + '_ {
        let n = self.instruments.len();
        self.values[col..].iter().step_by(n).copied()
    }

    /// Rows with `start <= t < end` as a new panel. The result keeps the
    /// requested window as its provenance.
    pub fn slice_window(&self, start: DateTime<Utc>, end: DateTime<Utc>) -> Result<AlignedPanel> {
        let n = self.instruments.len();
        let from = self.timestamps.partition_point(|&t| t < start);
        let to = self.timestamps.partition_point(|&t| t < end);
        if from >= to {
            return Err(Error::EmptyPanel);
        }
        Ok(AlignedPanel {
            instruments: self.instruments.clone(),
            timestamps: self.timestamps[from..to].to_vec(),
            values: self.values[from * n..to * n].to_vec(),
            window: (start, end),
        })
    }

    /// FNV-1a hash over instruments, timestamps and values; provenance for
    /// serialized outputs.
    pub fn hash_hex(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |bytes: &[u8]| {
            for &b in bytes {
                h ^= b as u64;
                h = h.wrapping_mul(0x1_0000_0000_01b3);
            }
        };
        for name in &self.instruments {
            eat(name.as_bytes());
            eat(&[0xff]);
        }
        for ts in &self.timestamps {
            eat(&ts.timestamp_millis().to_le_bytes());
        }
        for v in &self.values {
            eat(&v.to_le_bytes());
        }
        format!("{h:016x}")
    }
}

/// Intersect several return series into an [`AlignedPanel`].
///
/// A row exists exactly at timestamps where every series has a valid
/// (non-rollover) return inside `window` (half-open; `None` spans all
/// observations). Returns the panel and the number of dropped timestamps:
/// instants carried by at least one series but not by all.
pub fn align_panel(
    series: &[Vec<ReturnObservation>],
    window: Option<(DateTime<Utc>, DateTime<Utc>)>,
) -> Result<(AlignedPanel, usize)> {
    if series.is_empty() {
        return Err(Error::Validation("align_panel needs at least one series".into()));
    }

    let mut instruments = Vec::with_capacity(series.len());
    let mut maps: Vec<BTreeMap<DateTime<Utc>, f64>> = Vec::with_capacity(series.len());
    for obs_list in series {
        let name = obs_list
            .iter()
            .map(|o| o.instrument.clone())
            .next()
            .ok_or(Error::EmptyPanel)?;
        if instruments.contains(&name) {
            return Err(Error::Validation(format!(
                "instrument {name} appears in more than one series"
            )));
        }
        let mut map = BTreeMap::new();
        for obs in obs_list {
            if obs.instrument != name {
                return Err(Error::Validation(format!(
                    "series for {name} contains an observation for {}",
                    obs.instrument
                )));
            }
            if obs.rollover_affected {
                continue;
            }
            if let Some((lo, hi)) = window {
                if obs.timestamp < lo || obs.timestamp >= hi {
                    continue;
                }
            }
            if map.insert(obs.timestamp, obs.log_return).is_some() {
                return Err(Error::Validation(format!(
                    "series for {name} has duplicate timestamp {}",
                    obs.timestamp
                )));
            }
        }
        instruments.push(name);
        maps.push(map);
    }

    // union of candidate timestamps, then keep those present everywhere
    let mut union: BTreeMap<DateTime<Utc>, usize> = BTreeMap::new();
    for map in &maps {
        for &ts in map.keys() {
            *union.entry(ts).or_insert(0) += 1;
        }
    }
    let n = instruments.len();
    let kept: Vec<DateTime<Utc>> = union
        .iter()
        .filter(|&(_, &count)| count == n)
        .map(|(&ts, _)| ts)
        .collect();
    let dropped = union.len() - kept.len();
    if kept.is_empty() {
        return Err(Error::EmptyPanel);
    }

    let mut values = Vec::with_capacity(kept.len() * n);
    for &ts in &kept {
        for map in &maps {
            values.push(map[&ts]);
        }
    }
    let window = window.unwrap_or_else(|| {
        (
            *kept.first().unwrap(),
            *kept.last().unwrap() + chrono::TimeDelta::milliseconds(1),
        )
    });
    let panel = AlignedPanel::new(instruments, kept, values, window)?;
    Ok((panel, dropped))
}
