use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::model::*;
use crate::error::{Error, Result};
use crate::price::GapSeries;
use crate::volume::{TrendFit, VolumeComparison};

/// An output the report can be rendered as.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Selector {
    Json,
    Table1,
    Table2,
    Table3,
    Beta,
    Exclusions,
    Fig(u8),
}

impl Selector {
    pub fn all() -> Vec<Selector> {
        let mut v = vec![
            Selector::Json,
            Selector::Table1,
            Selector::Table2,
            Selector::Table3,
            Selector::Beta,
            Selector::Exclusions,
        ];
        v.extend((1..=16).map(Selector::Fig));
        v
    }

    pub fn file_name(self) -> String {
        match self {
            Selector::Json => "report.json".into(),
            other => format!("{other}.csv"),
        }
    }
}

impl std::fmt::Display for Selector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Selector::Json => f.write_str("json"),
            Selector::Table1 => f.write_str("table1"),
            Selector::Table2 => f.write_str("table2"),
            Selector::Table3 => f.write_str("table3"),
            Selector::Beta => f.write_str("beta"),
            Selector::Exclusions => f.write_str("exclusions"),
            Selector::Fig(n) => write!(f, "fig{n}"),
        }
    }
}

impl FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sel = match s {
            "json" => Selector::Json,
            "table1" => Selector::Table1,
            "table2" => Selector::Table2,
            "table3" => Selector::Table3,
            "beta" => Selector::Beta,
            "exclusions" => Selector::Exclusions,
            _ => match s.strip_prefix("fig").and_then(|n| n.parse::<u8>().ok()) {
                Some(n @ 1..=16) if s == format!("fig{n}") => Selector::Fig(n),
                _ => return Err(Error::UnknownSelector(s.to_string())),
            },
        };
        Ok(sel)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub file_name: String,
    pub contents: String,
}

/// Percentages: two decimals.
fn pct(v: f64) -> String {
    format!("{v:.2}")
}

/// Ratios and estimates: six significant digits, trailing zeros trimmed.
pub fn format_ratio(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let s = format!("{:.*e}", 5, v);
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        if exp > 5 {
            let unit = 10f64.powi(exp - 5);
            return format!("{:.0}", (v / unit).round() * unit);
        }
        let decimals = (5 - exp) as usize;
        trim(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mant.to_string()))
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn opt(v: Option<f64>, f: fn(f64) -> String) -> String {
    v.map(f).unwrap_or_default()
}

/// Raw data values echo at full precision.
fn raw(v: f64) -> String {
    v.to_string()
}

struct Csv(String);

impl Csv {
    fn new(header: &[&str]) -> Self {
        let mut c = Csv(String::new());
        c.row(header.iter().map(|s| s.to_string()));
        c
    }

    fn row(&mut self, cells: impl IntoIterator<Item = String>) {
        let cells: Vec<String> = cells
            .into_iter()
            .map(|c| {
                if c.contains([',', '"', '\n']) {
                    format!("\"{}\"", c.replace('"', "\"\""))
                } else {
                    c
                }
            })
            .collect();
        let _ = writeln!(self.0, "{}", cells.join(","));
    }
}

macro_rules! cells {
    ($($e:expr),* $(,)?) => { vec![$($e.to_string()),*] };
}

fn note<T>(c: &Computed<T>) -> String {
    c.reason().unwrap_or_default().to_string()
}

fn comparison_rows(csv: &mut Csv, id: &str, c: &Computed<VolumeComparison>) {
    match c {
        Computed::Value(v) => csv.row(cells![
            id,
            v.basis.as_str(),
            v.span,
            format_ratio(v.before_total),
            format_ratio(v.after_total),
            pct(v.after_pct_of_before),
            format_ratio(v.coverage),
            ""
        ]),
        Computed::Unavailable { reason } => csv.row(cells![id, "", "", "", "", "", "", reason]),
    }
}

fn trend_cells(t: &Computed<TrendFit>) -> Vec<String> {
    match t.value() {
        Some(t) => cells![
            format_ratio(t.slope),
            format_ratio(t.intercept),
            opt(t.normalized_slope_pct, pct),
            t.n_points
        ],
        None => cells!["", "", "", ""],
    }
}

fn series_rows(csv: &mut Csv, r: &AnalysisReport, lo: i64, hi: i64, value: fn(&DailyPoint) -> String) {
    for s in &r.samples {
        for p in s.daily.iter().filter(|p| (lo..=hi).contains(&p.offset)) {
            csv.row(cells![s.sample_id, p.offset, p.date, value(p)]);
        }
    }
}

fn gap_rows(csv: &mut Csv, id: &str, pair: &GapPair) {
    for g in [&pair.raw, &pair.adjusted] {
        if let Some(GapSeries { basis, points, .. }) = g.value() {
            for (off, gap) in points {
                csv.row(cells![id, basis.as_str(), off, format_ratio(*gap)]);
            }
        }
    }
}

fn abnormal_rows(csv: &mut Csv, id: &str, entries: &[AbnormalEntry]) {
    for e in entries {
        match &e.result {
            Computed::Value(a) => csv.row(cells![
                id,
                e.month,
                e.horizon_days,
                a.basis.as_str(),
                format_ratio(a.beta.beta),
                format_ratio(a.normal_return),
                format_ratio(a.market_influenced_return),
                pct(100.0 * a.abnormal),
                ""
            ]),
            Computed::Unavailable { reason } => {
                csv.row(cells![id, e.month, e.horizon_days, "", "", "", "", "", reason])
            }
        }
    }
}

const ABNORMAL_HEADER: [&str; 9] = [
    "sample_id",
    "month",
    "horizon_days",
    "basis",
    "beta",
    "normal_return",
    "market_influenced_return",
    "abnormal_pct",
    "note",
];

/// Renders one selector. Per-sample CSVs carry a trailing `note` column
/// holding the reason when a value is unavailable.
pub fn render(report: &AnalysisReport, selector: Selector) -> Result<Rendered> {
    let file_name = selector.file_name();
    let s = &report.meta.settings;
    let contents = match selector {
        Selector::Json => report.to_json()?,
        Selector::Table1 => {
            let mut c = Csv::new(&["sample_id", "ticker", "effective_date", "anchor_date", "split_ratio", "coverage"]);
            for x in &report.samples {
                c.row(cells![
                    x.sample_id,
                    x.ticker,
                    x.effective_date,
                    x.anchor_date,
                    raw(x.split_ratio),
                    format_ratio(x.window.coverage)
                ]);
            }
            c.0
        }
        Selector::Exclusions => {
            let mut c = Csv::new(&["sample_id", "ticker", "effective_date", "reason"]);
            for x in &report.exclusions {
                c.row(cells![x.sample_id, x.ticker, x.effective_date, x.reason]);
            }
            c.0
        }
        Selector::Fig(1) => {
            let mut c = Csv::new(&[
                "sample_id",
                "basis",
                "span",
                "before_total",
                "after_total",
                "after_pct_of_before",
                "coverage",
                "note",
            ]);
            for x in &report.samples {
                if let Some(h) = &x.h1 {
                    comparison_rows(&mut c, &x.sample_id, &h.volume_short);
                }
            }
            c.0
        }
        Selector::Fig(2) => {
            let mut c = Csv::new(&[
                "window",
                "before_share",
                "after_share",
                "before_total",
                "after_total",
                "samples",
                "note",
            ]);
            let a = &report.aggregate;
            for (label, sh) in [
                (format!("{}d", s.short_span), &a.volume_shares_short),
                (format!("{}d", s.long_span), &a.volume_shares_long),
                (format!("{}d", s.half_year()), &a.volume_shares_half_year),
            ] {
                match sh {
                    Computed::Value(v) => c.row(cells![
                        label,
                        format_ratio(v.before_share),
                        format_ratio(v.after_share),
                        format_ratio(v.before_total),
                        format_ratio(v.after_total),
                        v.samples,
                        ""
                    ]),
                    Computed::Unavailable { reason } => c.row(cells![label, "", "", "", "", "", reason]),
                }
            }
            c.0
        }
        Selector::Fig(3) => {
            let mut c = Csv::new(&["sample_id", "offset", "date", "volume"]);
            series_rows(&mut c, report, -s.short_span, s.short_span, |p| raw(p.volume));
            c.0
        }
        Selector::Fig(4) => {
            let mut c = Csv::new(&[
                "sample_id",
                "before_slope",
                "before_intercept",
                "before_normalized_slope_pct",
                "before_points",
                "after_slope",
                "after_intercept",
                "after_normalized_slope_pct",
                "after_points",
            ]);
            for x in &report.samples {
                if let Some(h) = &x.h1 {
                    let mut row = vec![x.sample_id.clone()];
                    row.extend(trend_cells(&h.trend_short.before));
                    row.extend(trend_cells(&h.trend_short.after));
                    c.row(row);
                }
            }
            c.0
        }
        Selector::Fig(5) => {
            let mut c = Csv::new(&["sample_id", "offset", "date", "price"]);
            let (lo, hi) = (crate::price::PERIOD_GROUPS[0].0, crate::price::PERIOD_GROUPS[2].1);
            series_rows(&mut c, report, lo, hi, |p| raw(p.price));
            c.0
        }
        Selector::Fig(6) => {
            let mut c = Csv::new(&["sample_id", "basis", "g1_avg", "g2_avg", "g3_avg", "note"]);
            for x in &report.samples {
                if let Some(h) = &x.h1 {
                    match &h.period_averages {
                        Computed::Value(p) => c.row(cells![
                            x.sample_id,
                            p.basis.as_str(),
                            format_ratio(p.g1_avg),
                            format_ratio(p.g2_avg),
                            format_ratio(p.g3_avg),
                            ""
                        ]),
                        Computed::Unavailable { reason } => c.row(cells![x.sample_id, "", "", "", "", reason]),
                    }
                }
            }
            c.0
        }
        Selector::Fig(7) => {
            let mut c = Csv::new(&[
                "sample_id",
                "horizon",
                "basis",
                "lo_used",
                "hi_used",
                "start_price",
                "end_price",
                "pct_change",
                "note",
            ]);
            for x in &report.samples {
                for h in x.h2.iter().flat_map(|h| &h.price_changes) {
                    match &h.change {
                        Computed::Value(p) => c.row(cells![
                            x.sample_id,
                            h.label,
                            p.basis.as_str(),
                            p.lo_used,
                            p.hi_used,
                            raw(p.start_price),
                            raw(p.end_price),
                            pct(p.pct),
                            ""
                        ]),
                        Computed::Unavailable { reason } => {
                            c.row(cells![x.sample_id, h.label, "", "", "", "", "", "", reason])
                        }
                    }
                }
            }
            c.0
        }
        Selector::Fig(8) | Selector::Table2 => {
            let mut c = Csv::new(&["sample_id", "split_year", "fiscal_year", "indexed_profit", "total_diff", "note"]);
            for x in &report.samples {
                let Some(h) = &x.h2 else { continue };
                match &h.indexed_profit {
                    Computed::Value(row) => {
                        for (year, v) in &row.values {
                            let last = Some(*year) == row.values.last().map(|v| v.0);
                            let diff = if last { opt(row.total_diff, pct) } else { String::new() };
                            c.row(cells![x.sample_id, row.split_year, year, pct(*v), diff, ""]);
                        }
                    }
                    Computed::Unavailable { reason } => c.row(cells![x.sample_id, "", "", "", "", reason]),
                }
            }
            c.0
        }
        Selector::Fig(9) => {
            let mut c = Csv::new(&["sample_id", "fiscal_year", "roe", "roe_change_pp", "note"]);
            for x in &report.samples {
                let Some(h) = &x.h2 else { continue };
                match &h.roe {
                    Computed::Value(r) => {
                        for (year, v) in &r.by_year {
                            let ch = if *year == r.end_year { pct(r.change_pp) } else { String::new() };
                            c.row(cells![x.sample_id, year, format_ratio(*v), ch, ""]);
                        }
                    }
                    Computed::Unavailable { reason } => c.row(cells![x.sample_id, "", "", "", reason]),
                }
            }
            c.0
        }
        Selector::Fig(10) => {
            let mut c = Csv::new(&["sample_id", "month", "before_pct", "after_pct", "note"]);
            for x in &report.samples {
                for m in x.h2.iter().flat_map(|h| &h.month_changes) {
                    let reasons = [note(&m.before), note(&m.after)]
                        .into_iter()
                        .filter(|r| !r.is_empty())
                        .collect::<Vec<_>>()
                        .join("; ");
                    c.row(cells![
                        x.sample_id,
                        m.month,
                        opt(m.before.value().map(|p| p.pct), pct),
                        opt(m.after.value().map(|p| p.pct), pct),
                        reasons
                    ]);
                }
            }
            c.0
        }
        Selector::Fig(11) | Selector::Fig(12) => {
            let mut c = Csv::new(&ABNORMAL_HEADER);
            for x in &report.samples {
                if let Some(h) = &x.h2 {
                    let entries = if selector == Selector::Fig(11) { &h.abnormal } else { &h.abnormal_demarcation };
                    abnormal_rows(&mut c, &x.sample_id, entries);
                }
            }
            c.0
        }
        Selector::Fig(13) | Selector::Fig(15) => {
            let mut c = Csv::new(&["sample_id", "basis", "offset", "gap"]);
            for x in &report.samples {
                if let Some(h) = &x.h3 {
                    let pair = if selector == Selector::Fig(13) { &h.gaps_long } else { &h.gaps_half_year };
                    gap_rows(&mut c, &x.sample_id, pair);
                }
            }
            c.0
        }
        Selector::Fig(14) | Selector::Fig(16) => {
            let span = if selector == Selector::Fig(14) { s.long_span } else { s.half_year() };
            let mut c = Csv::new(&["sample_id", "offset", "date", "volume"]);
            series_rows(&mut c, report, -span, span, |p| raw(p.volume));
            c.0
        }
        Selector::Fig(_) => unreachable!("selector parsing bounds figure numbers"),
        Selector::Table3 => {
            let mut c = Csv::new(&[
                "sample_id",
                "price_change_pct",
                "profit_change_pct",
                "roe_change_pp",
                "consistent",
                "note",
            ]);
            for x in &report.samples {
                let Some(h) = &x.h2 else { continue };
                match &h.consistency {
                    Computed::Value(t) => c.row(cells![
                        x.sample_id,
                        pct(t.price_change_pct),
                        pct(t.profit_change_pct),
                        pct(t.roe_change_pct),
                        t.consistent,
                        ""
                    ]),
                    Computed::Unavailable { reason } => c.row(cells![x.sample_id, "", "", "", "", reason]),
                }
            }
            c.0
        }
        Selector::Beta => {
            let mut c = Csv::new(&["sample_id", "variant", "beta", "n_obs", "note"]);
            for x in &report.samples {
                let Some(h) = &x.h2 else { continue };
                match &h.beta {
                    Computed::Value(b) => {
                        let variant = match b.variant {
                            crate::returns::BetaVariant::Covariance => "covariance",
                            crate::returns::BetaVariant::Correlation => "correlation",
                        };
                        c.row(cells![x.sample_id, variant, format_ratio(b.beta), b.n_obs, ""])
                    }
                    Computed::Unavailable { reason } => c.row(cells![x.sample_id, "", "", "", reason]),
                }
            }
            c.0
        }
    };
    Ok(Rendered { file_name, contents })
}

/// Writes each selector's rendering into `dir` and returns the paths.
pub fn emit(report: &AnalysisReport, dir: &Path, selectors: &[Selector]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::with_capacity(selectors.len());
    for &sel in selectors {
        let r = render(report, sel)?;
        let path = dir.join(&r.file_name);
        std::fs::write(&path, r.contents).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        written.push(path);
    }
    Ok(written)
}
