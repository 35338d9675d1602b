use std::collections::HashMap;

use chrono::{DateTime, Datelike, TimeDelta, TimeZone, Utc};

use crate::error::{Error, Result};

use super::{Bar, Tick};

/// Aggregate a tick stream into fixed-interval OHLCV bars.
///
/// Ticks may interleave instruments and contracts; within each
/// (instrument, contract) stream timestamps must be non-decreasing.
/// Intervals are aligned to the Unix epoch. Intervals with no ticks
/// produce no bar. Duplicate timestamps are kept in arrival order, so the
/// last tick of an interval defines the close.
pub fn aggregate_ticks(ticks: &[Tick], interval: TimeDelta) -> Result<Vec<Bar>> {
    if interval <= TimeDelta::zero() {
        return Err(Error::Validation(format!(
            "bar interval must be positive, got {interval}"
        )));
    }
    let interval_ms = interval.num_milliseconds();

    struct Open {
        bar: Bar,
        last_ts: DateTime<Utc>,
        seq: usize, // arrival index of the first tick, for output ordering
    }
    let mut open: HashMap<(String, String), Open> = HashMap::new();
    let mut done: Vec<Open> = Vec::new();

    for (seq, tick) in ticks.iter().enumerate() {
        tick.validate()?;
        let key = (tick.instrument.clone(), tick.contract.clone());
        let bucket = tick.timestamp.timestamp_millis().div_euclid(interval_ms);
        let start = Utc.timestamp_millis_opt(bucket * interval_ms).unwrap();

        if let Some(state) = open.get_mut(&key) {
            if tick.timestamp < state.last_ts {
                return Err(Error::Unsorted {
                    instrument: tick.instrument.clone(),
                    contract: tick.contract.clone(),
                    prev: state.last_ts.to_rfc3339(),
                    next: tick.timestamp.to_rfc3339(),
                });
            }
            state.last_ts = tick.timestamp;
            if state.bar.interval_start == start {
                let bar = &mut state.bar;
                bar.high = bar.high.max(tick.price);
                bar.low = bar.low.min(tick.price);
                bar.close = tick.price;
                bar.volume += tick.volume;
                bar.tick_count += 1;
                continue;
            }
            // interval rolled over: close out the previous bar
            let finished = open.remove(&key).unwrap();
            done.push(finished);
        }
        open.insert(
            key,
            Open {
                bar: Bar {
                    instrument: tick.instrument.clone(),
                    contract: tick.contract.clone(),
                    interval_start: start,
                    interval,
                    open: tick.price,
                    high: tick.price,
                    low: tick.price,
                    close: tick.price,
                    volume: tick.volume,
                    tick_count: 1,
                },
                last_ts: tick.timestamp,
                seq,
            },
        );
    }
    done.extend(open.into_values());
    done.sort_by(|a, b| {
        (&a.bar.instrument, a.bar.interval_start, a.seq)
            .cmp(&(&b.bar.instrument, b.bar.interval_start, b.seq))
    });
    Ok(done.into_iter().map(|s| s.bar).collect())
}

/// Calendar granularity for bucketed summaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalendarBucket {
    Year,
    Month,
}

impl CalendarBucket {
    /// Start of the bucket containing `ts`.
    pub fn floor(&self, ts: DateTime<Utc>) -> DateTime<Utc> {
        match self {
            CalendarBucket::Year => Utc.with_ymd_and_hms(ts.year(), 1, 1, 0, 0, 0).unwrap(),
            CalendarBucket::Month => Utc
                .with_ymd_and_hms(ts.year(), ts.month(), 1, 0, 0, 0)
                .unwrap(),
        }
    }

    /// Start of the bucket after the one containing `ts`.
    pub fn next_start(&self, ts: DateTime<Utc>) -> DateTime<Utc> {
        match self {
            CalendarBucket::Year => Utc.with_ymd_and_hms(ts.year() + 1, 1, 1, 0, 0, 0).unwrap(),
            CalendarBucket::Month => {
                let (y, m) = if ts.month() == 12 {
                    (ts.year() + 1, 1)
                } else {
                    (ts.year(), ts.month() + 1)
                };
                Utc.with_ymd_and_hms(y, m, 1, 0, 0, 0).unwrap()
            }
        }
    }
}

/// Mean per-bar volume over one calendar bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeBucket {
    pub bucket_start: DateTime<Utc>,
    pub mean_volume: f64,
    pub bar_count: usize,
}

/// Arithmetic mean of per-bar volume in each calendar bucket, in time
/// order. Empty input produces an empty list.
pub fn volume_profile(bars: &[Bar], bucket: CalendarBucket) -> Vec<VolumeBucket> {
    let mut acc: HashMap<DateTime<Utc>, (u128, usize)> = HashMap::new();
    for bar in bars {
        let key = bucket.floor(bar.interval_start);
        let entry = acc.entry(key).or_insert((0, 0));
        entry.0 += bar.volume as u128;
        entry.1 += 1;
    }
    let mut out: Vec<VolumeBucket> = acc
        .into_iter()
        .map(|(start, (sum, n))| VolumeBucket {
            bucket_start: start,
            mean_volume: sum as f64 / n as f64,
            bar_count: n,
        })
        .collect();
    out.sort_by_key(|b| b.bucket_start);
    out
}
