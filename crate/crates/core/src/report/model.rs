use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::data::{Basis, OffsetCalendar};
use crate::fundamentals::{IndexedProfitRow, TrendConsistency};
use crate::price::{GapSeries, PeriodAverages, PriceChange, ValueFactor};
use crate::returns::{AbnormalReturn, BetaEstimate, BetaVariant};
use crate::volume::{TrendFit, VolumeComparison, VolumeShares};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// A metric that was either computed or could not be, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Computed<T> {
    Value(T),
    Unavailable { reason: String },
}

impl<T> Computed<T> {
    pub fn value(&self) -> Option<&T> {
        match self {
            Computed::Value(v) => Some(v),
            Computed::Unavailable { .. } => None,
        }
    }

    pub fn reason(&self) -> Option<&str> {
        match self {
            Computed::Value(_) => None,
            Computed::Unavailable { reason } => Some(reason),
        }
    }
}

impl<T> From<crate::Result<T>> for Computed<T> {
    fn from(r: crate::Result<T>) -> Self {
        match r {
            Ok(v) => Computed::Value(v),
            Err(e) => Computed::Unavailable { reason: e.to_string() },
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    H1,
    H2,
    H3,
    #[default]
    All,
}

impl Hypothesis {
    pub fn includes(self, h: Hypothesis) -> bool {
        self == Hypothesis::All || self == h
    }
}

impl std::str::FromStr for Hypothesis {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "h1" => Ok(Self::H1),
            "h2" => Ok(Self::H2),
            "h3" => Ok(Self::H3),
            "all" => Ok(Self::All),
            other => Err(crate::Error::InvalidParameter(format!("unknown hypothesis `{other}`"))),
        }
    }
}

/// Every analysis parameter that influences a number in the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSettings {
    pub hypothesis: Hypothesis,
    pub price_basis: Basis,
    pub volume_basis: Basis,
    pub beta_variant: BetaVariant,
    pub month_days: i64,
    pub min_coverage: f64,
    pub calendar: OffsetCalendar,
    pub short_span: i64,
    pub long_span: i64,
    pub beta_pre_days: i64,
    pub demarcation_offsets: [i64; 2],
    pub fundamentals_through_year: Option<i32>,
    pub derive_adjusted_close: bool,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            hypothesis: Hypothesis::All,
            price_basis: Basis::Adjusted,
            volume_basis: Basis::Raw,
            beta_variant: BetaVariant::Covariance,
            month_days: 21,
            min_coverage: crate::data::DEFAULT_MIN_COVERAGE,
            calendar: OffsetCalendar::Weekdays,
            short_span: 30,
            long_span: 90,
            beta_pre_days: crate::returns::PRE_EVENT_DAYS,
            demarcation_offsets: [crate::returns::DEMARCATION_OFFSETS.0, crate::returns::DEMARCATION_OFFSETS.1],
            fundamentals_through_year: None,
            derive_adjusted_close: false,
        }
    }
}

impl AnalysisSettings {
    pub fn half_year(&self) -> i64 {
        6 * self.month_days
    }

    pub fn validate(&self) -> crate::Result<()> {
        let bad = |m: String| Err(crate::Error::Config(m));
        if self.month_days < 1 {
            return bad(format!("month_days {} < 1", self.month_days));
        }
        if !(0.0..=1.0).contains(&self.min_coverage) {
            return bad(format!("min_coverage {} outside [0, 1]", self.min_coverage));
        }
        if self.short_span < 1 || self.long_span < 1 {
            return bad("volume spans must be at least 1".into());
        }
        if self.beta_pre_days < 3 {
            return bad(format!("beta_pre_days {} < 3", self.beta_pre_days));
        }
        let [a, b] = self.demarcation_offsets;
        if a >= 0 || b >= 0 {
            return bad("demarcation offsets must be negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub engine: String,
    pub engine_version: String,
    pub schema_version: u32,
    pub settings: AnalysisSettings,
    pub inputs: Vec<InputDigest>,
    pub synthetic_seed: Option<u64>,
    /// Free-text description of the reference-rate series used for beta.
    pub reference_rates: Option<String>,
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowInfo {
    pub pre_days: i64,
    pub post_days: i64,
    pub calendar: OffsetCalendar,
    pub coverage: f64,
}

/// One row of the aligned window, on the run's price and volume bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyPoint {
    pub offset: i64,
    pub date: NaiveDate,
    pub price: f64,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPair {
    pub before: Computed<TrendFit>,
    pub after: Computed<TrendFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H1Metrics {
    pub volume_short: Computed<VolumeComparison>,
    pub trend_short: TrendPair,
    pub period_averages: Computed<PeriodAverages>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonChange {
    pub label: String,
    pub horizon_days: i64,
    pub change: Computed<PriceChange>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthChange {
    pub month: i64,
    /// From `-month` months to day 0.
    pub before: Computed<PriceChange>,
    /// From day 0 to `+month` months.
    pub after: Computed<PriceChange>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueFactorEntry {
    pub label: String,
    pub horizon_days: i64,
    /// Raw-basis price change from day -1 to the horizon.
    pub price_change: Computed<PriceChange>,
    pub factor: Computed<ValueFactor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbnormalEntry {
    pub month: i64,
    pub horizon_days: i64,
    pub result: Computed<AbnormalReturn>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoeSummary {
    pub by_year: Vec<(i32, f64)>,
    pub start_year: i32,
    pub end_year: i32,
    pub change_pp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H2Metrics {
    pub price_changes: Vec<HorizonChange>,
    pub month_changes: Vec<MonthChange>,
    pub value_factors: Vec<ValueFactorEntry>,
    pub beta: Computed<BetaEstimate>,
    pub abnormal: Vec<AbnormalEntry>,
    pub abnormal_demarcation: Vec<AbnormalEntry>,
    pub indexed_profit: Computed<IndexedProfitRow>,
    pub roe: Computed<RoeSummary>,
    pub consistency: Computed<TrendConsistency>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapPair {
    pub raw: Computed<GapSeries>,
    pub adjusted: Computed<GapSeries>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H3Metrics {
    pub gaps_long: GapPair,
    pub gaps_half_year: GapPair,
    pub volume_long: Computed<VolumeComparison>,
    pub trend_long: TrendPair,
    pub volume_half_year: Computed<VolumeComparison>,
    pub trend_half_year: TrendPair,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub sample_id: String,
    pub ticker: String,
    pub effective_date: NaiveDate,
    pub anchor_date: NaiveDate,
    pub split_ratio: f64,
    pub degenerate: bool,
    pub window: WindowInfo,
    pub h1: Option<H1Metrics>,
    pub h2: Option<H2Metrics>,
    pub h3: Option<H3Metrics>,
    pub daily: Vec<DailyPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub sample_id: String,
    pub ticker: String,
    pub effective_date: NaiveDate,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyCounts {
    pub evaluated: usize,
    pub consistent: usize,
    pub inconsistent: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub samples_analyzed: usize,
    pub samples_excluded: usize,
    pub volume_shares_short: Computed<VolumeShares>,
    pub volume_shares_long: Computed<VolumeShares>,
    pub volume_shares_half_year: Computed<VolumeShares>,
    pub consistency: ConsistencyCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub meta: RunMeta,
    pub samples: Vec<SampleReport>,
    pub exclusions: Vec<Exclusion>,
    pub aggregate: AggregateReport,
}

impl AnalysisReport {
    pub fn to_json(&self) -> crate::Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
