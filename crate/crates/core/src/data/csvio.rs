//! CSV ingestion and serialization for the four input files.
//!
//! All files are UTF-8, comma separated, with a mandatory header row:
//!
//! | file               | header                                              |
//! |--------------------|-----------------------------------------------------|
//! | `bars.csv`         | `ticker,date,open,high,low,close,adj_close,volume`  |
//! | `splits.csv`       | `ticker,effective_date,ratio`                       |
//! | `fundamentals.csv` | `ticker,fiscal_year,net_profit,shareholders_equity` |
//! | `rates.csv`        | `date,rate`                                         |
//!
//! Dates are ISO-8601 `YYYY-MM-DD`. Writers use the shortest round-trip
//! float representation so parse → write → parse is lossless.

use std::collections::HashSet;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;

use super::types::{FundamentalRecord, ReferenceRateSeries, SplitEvent, TradingBar};
use crate::error::{Error, Result};

pub const BARS_HEADER: [&str; 8] = [
    "ticker", "date", "open", "high", "low", "close", "adj_close", "volume",
];
pub const SPLITS_HEADER: [&str; 3] = ["ticker", "effective_date", "ratio"];
pub const FUNDAMENTALS_HEADER: [&str; 4] =
    ["ticker", "fiscal_year", "net_profit", "shareholders_equity"];
pub const RATES_HEADER: [&str; 2] = ["date", "rate"];

struct Rows<R: Read> {
    name: String,
    reader: csv::Reader<R>,
}

impl<R: Read> Rows<R> {
    fn open(name: &str, input: R, expected: &[&str]) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(input);
        let header = reader.headers().map_err(|e| Error::Row {
            path: name.to_string(),
            line: 1,
            message: e.to_string(),
        })?;
        let found: Vec<&str> = header.iter().collect();
        if found != expected {
            return Err(Error::Header {
                path: name.to_string(),
                expected: expected.join(","),
                found: found.join(","),
            });
        }
        Ok(Self {
            name: name.to_string(),
            reader,
        })
    }

    /// Visits every data row with its 1-based physical line number.
    fn for_each(
        &mut self,
        mut f: impl FnMut(u64, &csv::StringRecord) -> std::result::Result<(), String>,
    ) -> Result<()> {
        let mut record = csv::StringRecord::new();
        loop {
            let more = self.reader.read_record(&mut record).map_err(|e| Error::Row {
                path: self.name.clone(),
                line: e.position().map(|p| p.line()).unwrap_or(0),
                message: e.to_string(),
            })?;
            if !more {
                return Ok(());
            }
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            f(line, &record).map_err(|message| Error::Row {
                path: self.name.clone(),
                line,
                message,
            })?;
        }
    }
}

fn field<'r>(rec: &'r csv::StringRecord, idx: usize, name: &str) -> std::result::Result<&'r str, String> {
    rec.get(idx)
        .filter(|s| !s.is_empty())
        .ok_or_else(|| format!("missing field `{name}`"))
}

fn parse_date(s: &str, name: &str) -> std::result::Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").map_err(|e| format!("bad {name} `{s}`: {e}"))
}

fn parse_f64(s: &str, name: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("bad {name} `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("non-finite {name} `{s}`"));
    }
    Ok(v)
}

fn open_file(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_bars(path: impl AsRef<Path>) -> Result<Vec<TradingBar>> {
    let path = path.as_ref();
    read_bars(&path.display().to_string(), open_file(path)?)
}

/// Parses bars and returns them sorted by (ticker, date).
pub fn read_bars<R: Read>(name: &str, input: R) -> Result<Vec<TradingBar>> {
    let mut rows = Rows::open(name, input, &BARS_HEADER)?;
    let mut bars = Vec::new();
    let mut seen = HashSet::new();
    rows.for_each(|_, rec| {
        let ticker = field(rec, 0, "ticker")?.to_string();
        let date = parse_date(field(rec, 1, "date")?, "date")?;
        let mut px = [0.0; 5];
        for (i, name) in ["open", "high", "low", "close", "adj_close"].iter().enumerate() {
            px[i] = parse_f64(field(rec, i + 2, name)?, name)?;
        }
        let vol_s = field(rec, 7, "volume")?;
        let volume: i64 = vol_s
            .parse()
            .map_err(|_| format!("bad volume `{vol_s}` (integer share count expected)"))?;
        if volume < 0 {
            return Err(format!("negative volume {volume}"));
        }
        let bar = TradingBar::new(ticker, date, px[0], px[1], px[2], px[3], px[4], volume as u64)
            .map_err(|e| e.to_string())?;
        if !seen.insert((bar.ticker.clone(), bar.date)) {
            return Err(format!("duplicate key ({}, {})", bar.ticker, bar.date));
        }
        bars.push(bar);
        Ok(())
    })?;
    bars.sort_by(|a, b| a.ticker.cmp(&b.ticker).then(a.date.cmp(&b.date)));
    Ok(bars)
}

pub fn parse_splits(path: impl AsRef<Path>) -> Result<Vec<SplitEvent>> {
    let path = path.as_ref();
    read_splits(&path.display().to_string(), open_file(path)?)
}

/// Parses split events, sorted by (ticker, effective_date).
pub fn read_splits<R: Read>(name: &str, input: R) -> Result<Vec<SplitEvent>> {
    let mut rows = Rows::open(name, input, &SPLITS_HEADER)?;
    let mut events = Vec::new();
    let mut seen = HashSet::new();
    rows.for_each(|_, rec| {
        let ticker = field(rec, 0, "ticker")?.to_string();
        let date = parse_date(field(rec, 1, "effective_date")?, "effective_date")?;
        let ratio = parse_f64(field(rec, 2, "ratio")?, "ratio")?;
        let ev = SplitEvent::new(ticker, date, ratio).map_err(|e| e.to_string())?;
        if !seen.insert((ev.ticker.clone(), ev.effective_date)) {
            return Err(format!("duplicate key ({}, {})", ev.ticker, ev.effective_date));
        }
        events.push(ev);
        Ok(())
    })?;
    events.sort_by(|a, b| {
        a.ticker
            .cmp(&b.ticker)
            .then(a.effective_date.cmp(&b.effective_date))
    });
    Ok(events)
}

pub fn parse_fundamentals(path: impl AsRef<Path>) -> Result<Vec<FundamentalRecord>> {
    let path = path.as_ref();
    read_fundamentals(&path.display().to_string(), open_file(path)?)
}

/// Parses fundamentals, sorted by (ticker, fiscal_year).
pub fn read_fundamentals<R: Read>(name: &str, input: R) -> Result<Vec<FundamentalRecord>> {
    let mut rows = Rows::open(name, input, &FUNDAMENTALS_HEADER)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    rows.for_each(|_, rec| {
        let ticker = field(rec, 0, "ticker")?.to_string();
        let year_s = field(rec, 1, "fiscal_year")?;
        let fiscal_year: i32 = year_s
            .parse()
            .map_err(|_| format!("bad fiscal_year `{year_s}`"))?;
        let net_profit = parse_f64(field(rec, 2, "net_profit")?, "net_profit")?;
        let shareholders_equity =
            parse_f64(field(rec, 3, "shareholders_equity")?, "shareholders_equity")?;
        if !seen.insert((ticker.clone(), fiscal_year)) {
            return Err(format!("duplicate key ({ticker}, {fiscal_year})"));
        }
        out.push(FundamentalRecord {
            ticker,
            fiscal_year,
            net_profit,
            shareholders_equity,
        });
        Ok(())
    })?;
    out.sort_by(|a, b| a.ticker.cmp(&b.ticker).then(a.fiscal_year.cmp(&b.fiscal_year)));
    Ok(out)
}

pub fn parse_rates(path: impl AsRef<Path>) -> Result<ReferenceRateSeries> {
    let path = path.as_ref();
    read_rates(&path.display().to_string(), open_file(path)?)
}

/// Parses a reference-rate series. Rows may arrive in any order; duplicate
/// dates are rejected.
pub fn read_rates<R: Read>(name: &str, input: R) -> Result<ReferenceRateSeries> {
    let mut rows = Rows::open(name, input, &RATES_HEADER)?;
    let mut points = Vec::new();
    let mut seen = HashSet::new();
    rows.for_each(|_, rec| {
        let date = parse_date(field(rec, 0, "date")?, "date")?;
        let rate = parse_f64(field(rec, 1, "rate")?, "rate")?;
        if !seen.insert(date) {
            return Err(format!("duplicate key ({date})"));
        }
        points.push((date, rate));
        Ok(())
    })?;
    points.sort_by_key(|(d, _)| *d);
    ReferenceRateSeries::new(points)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Invariant(format!("csv write failed: {e}"))
}

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header).map_err(csv_err)?;
    Ok(w)
}

pub fn write_bars<W: Write>(out: W, bars: &[TradingBar]) -> Result<()> {
    let mut w = writer(out, &BARS_HEADER)?;
    for b in bars {
        w.write_record([
            b.ticker.clone(),
            b.date.to_string(),
            b.open.to_string(),
            b.high.to_string(),
            b.low.to_string(),
            b.close.to_string(),
            b.adj_close.to_string(),
            b.volume.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Invariant(e.to_string()))
}

pub fn write_splits<W: Write>(out: W, events: &[SplitEvent]) -> Result<()> {
    let mut w = writer(out, &SPLITS_HEADER)?;
    for e in events {
        w.write_record([e.ticker.clone(), e.effective_date.to_string(), e.ratio.to_string()])
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Invariant(e.to_string()))
}

pub fn write_fundamentals<W: Write>(out: W, records: &[FundamentalRecord]) -> Result<()> {
    let mut w = writer(out, &FUNDAMENTALS_HEADER)?;
    for r in records {
        w.write_record([
            r.ticker.clone(),
            r.fiscal_year.to_string(),
            r.net_profit.to_string(),
            r.shareholders_equity.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Invariant(e.to_string()))
}

pub fn write_rates<W: Write>(out: W, rates: &ReferenceRateSeries) -> Result<()> {
    let mut w = writer(out, &RATES_HEADER)?;
    for (d, r) in rates.points() {
        w.write_record([d.to_string(), r.to_string()]).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Invariant(e.to_string()))
}
