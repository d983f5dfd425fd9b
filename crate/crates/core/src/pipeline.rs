//! Runs every selected hypothesis over each split sample and assembles the report.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::Datelike;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::{
    align_to_event, read_bars, read_fundamentals, read_rates, read_splits, split_adjust, AdjustMode, Basis,
    EventWindow, FundamentalRecord, ReferenceRateSeries, SplitEvent, TradingBar,
};
use crate::error::{Error, Result};
use crate::fundamentals::{classify_consistency, indexed_net_profit, roe, roe_change, TrendConsistency};
use crate::price::{gap_series, period_averages, price_change_pct, value_factor, PriceChange, PERIOD_GROUPS};
use crate::report::{
    AbnormalEntry, AggregateReport, AnalysisReport, AnalysisSettings, Computed, ConsistencyCounts, DailyPoint,
    Exclusion, GapPair, H1Metrics, H2Metrics, H3Metrics, HorizonChange, Hypothesis, InputDigest, MonthChange,
    RoeSummary, RunMeta, SampleReport, TrendPair, ValueFactorEntry, WindowInfo, REPORT_SCHEMA_VERSION,
};
use crate::returns::{abnormal_return, estimate_window_beta, AbnormalOptions, Baseline, BetaEstimate};
use crate::synthetic::{generate_universe, Universe, UniverseSpec};
use crate::volume::{aggregate_volume_share, compare_volume, volume_trend, VolumeComparison};

pub const CONFIG_VERSION: u32 = 1;

/// Months after the split at which price changes and value factors are read.
const CHANGE_MONTHS: [i64; 4] = [1, 3, 6, 12];
const VALUE_FACTOR_MONTHS: [i64; 2] = [6, 12];
/// Months for the abnormal-return and before/after change horizons.
const HORIZON_MONTHS: [i64; 4] = [1, 2, 3, 4];

/// A run as read from a TOML file or assembled from CLI flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub bars: Option<PathBuf>,
    pub splits: Option<PathBuf>,
    pub fundamentals: Option<PathBuf>,
    pub rates: Option<PathBuf>,
    /// What the rates file holds, echoed into the report.
    pub rates_description: Option<String>,
    /// Generate a synthetic universe with this seed when no bars are given.
    pub seed: Option<u64>,
    pub out: PathBuf,
    pub emit: Vec<String>,
    /// Caller-pinned timestamp; the engine never reads the clock.
    pub timestamp: Option<String>,
    pub analysis: AnalysisSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            bars: None,
            splits: None,
            fundamentals: None,
            rates: None,
            rates_description: None,
            seed: None,
            out: PathBuf::from("out"),
            emit: vec!["json".into()],
            timestamp: None,
            analysis: AnalysisSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.bars.is_some() != self.splits.is_some() {
            return Err(Error::Config("bars and splits must be given together".into()));
        }
        if self.bars.is_none() && self.seed.is_none() {
            return Err(Error::Config("either input files or a synthetic seed is required".into()));
        }
        self.analysis.validate()
    }
}

fn load_input(role: &str, path: &Path) -> Result<(Vec<u8>, InputDigest)> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let sha256 = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    let digest = InputDigest {
        role: role.into(),
        path: path.display().to_string(),
        sha256,
        bytes: bytes.len() as u64,
    };
    Ok((bytes, digest))
}

/// Loads the configured inputs (or generates them) and analyzes them.
pub fn run_pipeline(config: &RunConfig) -> Result<AnalysisReport> {
    config.validate()?;
    let mut inputs = Vec::new();
    let mut synthetic_seed = None;
    let universe = match (&config.bars, &config.splits) {
        (Some(bars_path), Some(splits_path)) => {
            let (bytes, d) = load_input("bars", bars_path)?;
            inputs.push(d);
            let bars = read_bars(&bars_path.display().to_string(), bytes.as_slice())?;
            let (bytes, d) = load_input("splits", splits_path)?;
            inputs.push(d);
            let events = read_splits(&splits_path.display().to_string(), bytes.as_slice())?;
            let fundamentals = match &config.fundamentals {
                Some(p) => {
                    let (bytes, d) = load_input("fundamentals", p)?;
                    inputs.push(d);
                    read_fundamentals(&p.display().to_string(), bytes.as_slice())?
                }
                None => Vec::new(),
            };
            let rates = match &config.rates {
                Some(p) => {
                    let (bytes, d) = load_input("rates", p)?;
                    inputs.push(d);
                    read_rates(&p.display().to_string(), bytes.as_slice())?
                }
                None => ReferenceRateSeries::default(),
            };
            Universe {
                bars,
                events,
                fundamentals,
                rates,
            }
        }
        _ => {
            let seed = config.seed.expect("validated");
            synthetic_seed = Some(seed);
            generate_universe(&UniverseSpec {
                seed,
                ..Default::default()
            })?
        }
    };
    let mut report = analyze_universe(&universe, &config.analysis)?;
    report.meta.inputs = inputs;
    report.meta.synthetic_seed = synthetic_seed;
    report.meta.timestamp = config.timestamp.clone();
    report.meta.reference_rates = config.rates_description.clone().or_else(|| {
        synthetic_seed.map(|_| "synthetic short-rate series, independent of the stocks".to_string())
    });
    Ok(report)
}

/// Offset span the selected hypotheses need at full coverage.
fn core_span(s: &AnalysisSettings) -> (i64, i64) {
    let mut pre = 0;
    let mut post = 0;
    if s.hypothesis.includes(Hypothesis::H1) {
        let g = PERIOD_GROUPS[0].0.abs().max(PERIOD_GROUPS[2].1);
        pre = pre.max(g.max(s.short_span));
        post = post.max(g.max(s.short_span));
    }
    if s.hypothesis.includes(Hypothesis::H2) {
        let months = HORIZON_MONTHS.iter().max().unwrap() * s.month_days;
        let demarc = s.demarcation_offsets.iter().map(|o| o.abs()).max().unwrap();
        pre = pre.max(s.beta_pre_days.max(months).max(demarc));
        post = post.max(months);
    }
    if s.hypothesis.includes(Hypothesis::H3) {
        pre = pre.max(s.long_span.max(s.half_year()));
        post = post.max(s.long_span.max(s.half_year()));
    }
    (pre, post)
}

/// Analyzes an in-memory universe. Input digests are left empty.
pub fn analyze_universe(universe: &Universe, settings: &AnalysisSettings) -> Result<AnalysisReport> {
    settings.validate()?;

    let mut by_ticker: BTreeMap<&str, Vec<TradingBar>> = BTreeMap::new();
    for b in &universe.bars {
        by_ticker.entry(b.ticker.as_str()).or_default().push(b.clone());
    }
    if settings.derive_adjusted_close {
        for bars in by_ticker.values_mut() {
            let adjusted = split_adjust(bars, &universe.events, AdjustMode::Prices);
            for (b, a) in bars.iter_mut().zip(adjusted) {
                b.adj_close = a.close;
            }
        }
    }
    let mut fundamentals: BTreeMap<&str, Vec<FundamentalRecord>> = BTreeMap::new();
    for r in &universe.fundamentals {
        fundamentals.entry(r.ticker.as_str()).or_default().push(r.clone());
    }

    let mut events = universe.events.clone();
    events.sort_by(|a, b| a.ticker.cmp(&b.ticker).then(a.effective_date.cmp(&b.effective_date)));

    let outcomes: Vec<std::result::Result<SampleReport, Exclusion>> = events
        .par_iter()
        .map(|event| {
            let bars = by_ticker.get(event.ticker.as_str()).map(Vec::as_slice).unwrap_or(&[]);
            let recs = fundamentals.get(event.ticker.as_str()).map(Vec::as_slice).unwrap_or(&[]);
            analyze_sample(bars, event, recs, &universe.rates, settings).map_err(|e| Exclusion {
                sample_id: event.sample_id(),
                ticker: event.ticker.clone(),
                effective_date: event.effective_date,
                reason: e.to_string(),
            })
        })
        .collect();

    let mut samples = Vec::new();
    let mut exclusions = Vec::new();
    for o in outcomes {
        match o {
            Ok(s) => samples.push(s),
            Err(x) => exclusions.push(x),
        }
    }
    if samples.is_empty() {
        return Err(Error::NoAnalyzableSamples);
    }

    let aggregate = aggregate(&samples, exclusions.len());
    Ok(AnalysisReport {
        meta: RunMeta {
            engine: "splitstudy".into(),
            engine_version: env!("CARGO_PKG_VERSION").into(),
            schema_version: REPORT_SCHEMA_VERSION,
            settings: settings.clone(),
            inputs: Vec::new(),
            synthetic_seed: None,
            reference_rates: None,
            timestamp: None,
        },
        samples,
        exclusions,
        aggregate,
    })
}

fn shares<'a>(comparisons: impl Iterator<Item = &'a Computed<VolumeComparison>>) -> Computed<crate::volume::VolumeShares> {
    let values: Vec<VolumeComparison> = comparisons.filter_map(|c| c.value().copied()).collect();
    if values.is_empty() {
        return Computed::Unavailable {
            reason: "no sample has this volume comparison".into(),
        };
    }
    aggregate_volume_share(&values).into()
}

fn aggregate(samples: &[SampleReport], excluded: usize) -> AggregateReport {
    let mut consistency = ConsistencyCounts::default();
    for c in samples.iter().filter_map(|s| s.h2.as_ref()).filter_map(|h| h.consistency.value()) {
        consistency.evaluated += 1;
        if c.consistent {
            consistency.consistent += 1;
        } else {
            consistency.inconsistent += 1;
        }
    }
    let h1 = || samples.iter().filter_map(|s| s.h1.as_ref());
    let h3 = || samples.iter().filter_map(|s| s.h3.as_ref());
    AggregateReport {
        samples_analyzed: samples.len(),
        samples_excluded: excluded,
        volume_shares_short: shares(h1().map(|h| &h.volume_short)),
        volume_shares_long: shares(h3().map(|h| &h.volume_long)),
        volume_shares_half_year: shares(h3().map(|h| &h.volume_half_year)),
        consistency,
    }
}

/// Analyzes one split. An error means the sample is excluded.
pub fn analyze_sample(
    bars: &[TradingBar],
    event: &SplitEvent,
    fundamentals: &[FundamentalRecord],
    rates: &ReferenceRateSeries,
    s: &AnalysisSettings,
) -> Result<SampleReport> {
    if bars.is_empty() {
        return Err(Error::MissingRecord(format!("no bars for ticker {}", event.ticker)));
    }
    let (pre, post) = core_span(s);
    let window = align_to_event(bars, event, pre, post, s.min_coverage, s.calendar)?;
    let far = CHANGE_MONTHS.iter().max().unwrap() * s.month_days;
    let extended = align_to_event(bars, event, pre, post.max(far), 0.0, s.calendar)?;
    let anchor = window.anchor().ok_or(Error::CannotAnchor {
        ticker: event.ticker.clone(),
        date: event.effective_date,
    })?;

    let h1 = s.hypothesis.includes(Hypothesis::H1).then(|| h1_metrics(&window, s));
    let h2 = s
        .hypothesis
        .includes(Hypothesis::H2)
        .then(|| h2_metrics(&window, &extended, event, fundamentals, rates, s));
    let h3 = s.hypothesis.includes(Hypothesis::H3).then(|| h3_metrics(&window, s));

    let daily = window
        .range(-pre, post)
        .map(|(offset, b)| DailyPoint {
            offset,
            date: b.date,
            price: b.price(s.price_basis),
            volume: b.volume_on(s.volume_basis),
        })
        .collect();

    Ok(SampleReport {
        sample_id: event.sample_id(),
        ticker: event.ticker.clone(),
        effective_date: event.effective_date,
        anchor_date: anchor.date,
        split_ratio: event.ratio,
        degenerate: event.is_degenerate(),
        window: WindowInfo {
            pre_days: pre,
            post_days: post,
            calendar: s.calendar,
            coverage: window.coverage,
        },
        h1,
        h2,
        h3,
        daily,
    })
}

fn trend_pair(window: &EventWindow, span: i64, basis: Basis) -> TrendPair {
    TrendPair {
        before: volume_trend(window, -span, -1, basis).into(),
        after: volume_trend(window, 1, span, basis).into(),
    }
}

fn h1_metrics(window: &EventWindow, s: &AnalysisSettings) -> H1Metrics {
    H1Metrics {
        volume_short: compare_volume(window, s.short_span, s.volume_basis).into(),
        trend_short: trend_pair(window, s.short_span, s.volume_basis),
        period_averages: period_averages(window, s.price_basis).into(),
    }
}

fn h3_metrics(window: &EventWindow, s: &AnalysisSettings) -> H3Metrics {
    let gaps = |span: i64| GapPair {
        raw: gap_series(window, -span, span, Basis::Raw).into(),
        adjusted: gap_series(window, -span, span, Basis::Adjusted).into(),
    };
    H3Metrics {
        gaps_long: gaps(s.long_span),
        gaps_half_year: gaps(s.half_year()),
        volume_long: compare_volume(window, s.long_span, s.volume_basis).into(),
        trend_long: trend_pair(window, s.long_span, s.volume_basis),
        volume_half_year: compare_volume(window, s.half_year(), s.volume_basis).into(),
        trend_half_year: trend_pair(window, s.half_year(), s.volume_basis),
    }
}

fn h2_metrics(
    window: &EventWindow,
    extended: &EventWindow,
    event: &SplitEvent,
    fundamentals: &[FundamentalRecord],
    rates: &ReferenceRateSeries,
    s: &AnalysisSettings,
) -> H2Metrics {
    let m = s.month_days;
    let price_changes: Vec<HorizonChange> = CHANGE_MONTHS
        .iter()
        .map(|&k| HorizonChange {
            label: format!("{k}m"),
            horizon_days: k * m,
            change: price_change_pct(extended, -1, k * m, s.price_basis).into(),
        })
        .collect();
    let month_changes = HORIZON_MONTHS
        .iter()
        .map(|&k| MonthChange {
            month: k,
            before: price_change_pct(window, -k * m, 0, s.price_basis).into(),
            after: price_change_pct(window, 0, k * m, s.price_basis).into(),
        })
        .collect();
    let value_factors = VALUE_FACTOR_MONTHS
        .iter()
        .map(|&k| {
            let change = price_change_pct(extended, -1, k * m, Basis::Raw);
            let factor = change
                .as_ref()
                .map_err(|e| Error::InsufficientData(e.to_string()))
                .and_then(|c: &PriceChange| value_factor(c.end_price / c.start_price, event.ratio));
            ValueFactorEntry {
                label: format!("{k}m"),
                horizon_days: k * m,
                price_change: change.into(),
                factor: factor.into(),
            }
        })
        .collect();

    let beta: Result<BetaEstimate> = if rates.is_empty() {
        Err(Error::MissingRecord("no reference rates supplied".into()))
    } else {
        estimate_window_beta(window, rates, s.beta_pre_days, s.price_basis, s.beta_variant)
    };
    let abnormal_for = |baseline: Baseline| -> Vec<AbnormalEntry> {
        HORIZON_MONTHS
            .iter()
            .map(|&k| {
                let opts = AbnormalOptions {
                    basis: s.price_basis,
                    baseline,
                    pre_days: s.beta_pre_days,
                    demarcation: (s.demarcation_offsets[0], s.demarcation_offsets[1]),
                };
                let result = match &beta {
                    Ok(b) => abnormal_return(window, k * m, *b, opts).into(),
                    Err(e) => Computed::Unavailable {
                        reason: format!("beta unavailable: {e}"),
                    },
                };
                AbnormalEntry {
                    month: k,
                    horizon_days: k * m,
                    result,
                }
            })
            .collect()
    };
    let abnormal = abnormal_for(Baseline::PeriodStart);
    let abnormal_demarcation = abnormal_for(Baseline::Demarcation);

    let split_year = event.effective_date.year();
    let indexed = indexed_net_profit(fundamentals, split_year, s.fundamentals_through_year);
    let roe_summary = roe_summary(fundamentals, split_year, s.fundamentals_through_year);
    let consistency = consistency(
        price_changes.last().map(|p| &p.change),
        &indexed,
        &roe_summary,
    );

    H2Metrics {
        price_changes,
        month_changes,
        value_factors,
        beta: beta.into(),
        abnormal,
        abnormal_demarcation,
        indexed_profit: indexed.into(),
        roe: roe_summary.into(),
        consistency,
    }
}

fn roe_summary(records: &[FundamentalRecord], split_year: i32, through: Option<i32>) -> Result<RoeSummary> {
    let mut rows: Vec<&FundamentalRecord> = records
        .iter()
        .filter(|r| r.fiscal_year >= split_year && through.is_none_or(|t| r.fiscal_year <= t))
        .collect();
    rows.sort_by_key(|r| r.fiscal_year);
    let start = rows
        .first()
        .filter(|r| r.fiscal_year == split_year)
        .ok_or_else(|| Error::MissingRecord(format!("no fundamentals for split year {split_year}")))?;
    let end = rows.last().expect("non-empty");
    let end_year = through.unwrap_or(end.fiscal_year);
    if end.fiscal_year != end_year || end_year == split_year {
        return Err(Error::MissingRecord(format!("no fundamentals for fiscal year {end_year}")));
    }
    let by_year = rows
        .iter()
        .map(|r| Ok((r.fiscal_year, roe(r)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RoeSummary {
        start_year: split_year,
        end_year,
        change_pp: roe_change(start, end)?,
        by_year,
    })
}

fn consistency(
    price: Option<&Computed<PriceChange>>,
    indexed: &Result<crate::fundamentals::IndexedProfitRow>,
    roe: &Result<RoeSummary>,
) -> Computed<TrendConsistency> {
    let price = match price.and_then(|c| c.value()) {
        Some(p) => p.pct,
        None => return unavailable("price change unavailable"),
    };
    let profit = match indexed.as_ref().ok().and_then(|r| r.total_diff) {
        Some(d) => d,
        None => return unavailable("profit change unavailable"),
    };
    let roe = match roe {
        Ok(r) => r.change_pp,
        Err(_) => return unavailable("ROE change unavailable"),
    };
    Computed::Value(classify_consistency(price, profit, roe))
}

fn unavailable<T>(reason: &str) -> Computed<T> {
    Computed::Unavailable { reason: reason.into() }
}
