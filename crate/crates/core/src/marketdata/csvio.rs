//! CSV schemas for ticks, bars and the rollover calendar. All files are
//! UTF-8 with LF endings, `.` decimal separators, and RFC 3339 timestamps
//! carrying an explicit zone offset; everything is normalized to UTC on
//! read. Floats are written with shortest round-trip precision.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, TimeDelta, Utc};

use crate::error::{Error, Result};

use super::{Bar, RolloverCalendar, Tick};

pub const TICK_HEADER: &[&str] = &["timestamp", "instrument", "contract", "price", "volume"];
pub const BAR_HEADER: &[&str] = &[
    "interval_start",
    "interval_seconds",
    "instrument",
    "contract",
    "open",
    "high",
    "low",
    "close",
    "volume",
    "tick_count",
];
pub const CALENDAR_HEADER: &[&str] = &["instrument", "switch_timestamp"];

fn parse_err(file: &str, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        file: file.to_string(),
        line,
        message: message.into(),
    }
}

fn check_header(file: &str, record: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = record.iter().map(str::trim).collect();
    if got != expected {
        return Err(parse_err(
            file,
            1,
            format!("expected header `{}`, got `{}`", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn parse_timestamp(file: &str, line: u64, field: &str) -> Result<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(field.trim())
        .map(|dt| dt.with_timezone(&Utc))
        .map_err(|e| parse_err(file, line, format!("bad timestamp `{field}`: {e}")))
}

fn parse_f64(file: &str, line: u64, name: &str, field: &str) -> Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| parse_err(file, line, format!("bad {name} `{field}`: not a number")))
}

fn parse_u64(file: &str, line: u64, name: &str, field: &str) -> Result<u64> {
    field
        .trim()
        .parse::<u64>()
        .map_err(|_| parse_err(file, line, format!("bad {name} `{field}`: not a non-negative integer")))
}

fn parse_i64(file: &str, line: u64, name: &str, field: &str) -> Result<i64> {
    field
        .trim()
        .parse::<i64>()
        .map_err(|_| parse_err(file, line, format!("bad {name} `{field}`: not an integer")))
}

/// Read ticks from `timestamp,instrument,contract,price,volume`.
pub fn read_ticks(path: impl AsRef<Path>) -> Result<Vec<Tick>> {
    let path = path.as_ref();
    let file_name = path.display().to_string();
    read_ticks_from(std::fs::File::open(path)?, &file_name)
}

pub fn read_ticks_from(reader: impl Read, file_name: &str) -> Result<Vec<Tick>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    check_header(file_name, rdr.headers().map_err(|e| csv_err(file_name, &e))?, TICK_HEADER)?;
    let mut record = csv::StringRecord::new();
    let mut out = Vec::new();
    while rdr
        .read_record(&mut record)
        .map_err(|e| csv_err(file_name, &e))?
    {
        let line = record_line(&record);
        if record.len() != TICK_HEADER.len() {
            return Err(parse_err(
                file_name,
                line,
                format!("expected {} fields, got {}", TICK_HEADER.len(), record.len()),
            ));
        }
        let price = parse_f64(file_name, line, "price", &record[3])?;
        if !(price > 0.0) || !price.is_finite() {
            return Err(parse_err(file_name, line, format!("price must be positive, got {price}")));
        }
        out.push(Tick {
            timestamp: parse_timestamp(file_name, line, &record[0])?,
            instrument: record[1].trim().to_string(),
            contract: record[2].trim().to_string(),
            price,
            volume: parse_u64(file_name, line, "volume", &record[4])?,
        });
    }
    Ok(out)
}

fn csv_err(file: &str, e: &csv::Error) -> Error {
    let line = match e.position() {
        Some(p) => p.line(),
        None => 0,
    };
    parse_err(file, line, e.to_string())
}

fn format_ts(ts: DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn write_ticks(writer: impl Write, ticks: &[Tick]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TICK_HEADER).map_err(io_of_csv)?;
    for t in ticks {
        w.write_record(&[
            format_ts(t.timestamp),
            t.instrument.clone(),
            t.contract.clone(),
            format!("{}", t.price),
            format!("{}", t.volume),
        ])
        .map_err(io_of_csv)?;
    }
    w.flush()?;
    Ok(())
}

fn io_of_csv(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Read bars from
/// `interval_start,interval_seconds,instrument,contract,open,high,low,close,volume,tick_count`.
/// Every bar is validated on the way in.
pub fn read_bars(path: impl AsRef<Path>) -> Result<Vec<Bar>> {
    let path = path.as_ref();
    let file_name = path.display().to_string();
    read_bars_from(std::fs::File::open(path)?, &file_name)
}

pub fn read_bars_from(reader: impl Read, file_name: &str) -> Result<Vec<Bar>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    check_header(file_name, rdr.headers().map_err(|e| csv_err(file_name, &e))?, BAR_HEADER)?;
    let mut record = csv::StringRecord::new();
    let mut out = Vec::new();
    while rdr
        .read_record(&mut record)
        .map_err(|e| csv_err(file_name, &e))?
    {
        let line = record_line(&record);
        if record.len() != BAR_HEADER.len() {
            return Err(parse_err(
                file_name,
                line,
                format!("expected {} fields, got {}", BAR_HEADER.len(), record.len()),
            ));
        }
        let secs = parse_i64(file_name, line, "interval_seconds", &record[1])?;
        if secs <= 0 {
            return Err(parse_err(file_name, line, "interval_seconds must be positive"));
        }
        let bar = Bar {
            interval_start: parse_timestamp(file_name, line, &record[0])?,
            interval: TimeDelta::seconds(secs),
            instrument: record[2].trim().to_string(),
            contract: record[3].trim().to_string(),
            open: parse_f64(file_name, line, "open", &record[4])?,
            high: parse_f64(file_name, line, "high", &record[5])?,
            low: parse_f64(file_name, line, "low", &record[6])?,
            close: parse_f64(file_name, line, "close", &record[7])?,
            volume: parse_u64(file_name, line, "volume", &record[8])?,
            tick_count: parse_u64(file_name, line, "tick_count", &record[9])?,
        };
        bar.validate()
            .map_err(|e| parse_err(file_name, line, e.to_string()))?;
        out.push(bar);
    }
    Ok(out)
}

pub fn write_bars(writer: impl Write, bars: &[Bar]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(BAR_HEADER).map_err(io_of_csv)?;
    for b in bars {
        w.write_record(&[
            format_ts(b.interval_start),
            format!("{}", b.interval.num_seconds()),
            b.instrument.clone(),
            b.contract.clone(),
            format!("{}", b.open),
            format!("{}", b.high),
            format!("{}", b.low),
            format!("{}", b.close),
            format!("{}", b.volume),
            format!("{}", b.tick_count),
        ])
        .map_err(io_of_csv)?;
    }
    w.flush()?;
    Ok(())
}

/// Read the rollover calendar from `instrument,switch_timestamp`.
pub fn read_rollover_calendar(path: impl AsRef<Path>) -> Result<RolloverCalendar> {
    let path = path.as_ref();
    let file_name = path.display().to_string();
    read_rollover_calendar_from(std::fs::File::open(path)?, &file_name)
}

pub fn read_rollover_calendar_from(reader: impl Read, file_name: &str) -> Result<RolloverCalendar> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    check_header(
        file_name,
        rdr.headers().map_err(|e| csv_err(file_name, &e))?,
        CALENDAR_HEADER,
    )?;
    let mut record = csv::StringRecord::new();
    let mut entries = Vec::new();
    while rdr
        .read_record(&mut record)
        .map_err(|e| csv_err(file_name, &e))?
    {
        let line = record_line(&record);
        if record.len() != CALENDAR_HEADER.len() {
            return Err(parse_err(
                file_name,
                line,
                format!("expected {} fields, got {}", CALENDAR_HEADER.len(), record.len()),
            ));
        }
        entries.push((
            record[0].trim().to_string(),
            parse_timestamp(file_name, line, &record[1])?,
        ));
    }
    Ok(RolloverCalendar::new(entries))
}
