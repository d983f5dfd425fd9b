use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which unit system a metric is computed in.
///
/// `Raw` reads the traded quotes as printed. `Adjusted` restates every bar in
/// post-split units using the feed's own factor `close / adj_close`: prices
/// and ranges are divided by it, volumes multiplied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Raw,
    Adjusted,
}

impl Basis {
    pub fn as_str(self) -> &'static str {
        match self {
            Basis::Raw => "raw",
            Basis::Adjusted => "adjusted",
        }
    }
}

impl std::str::FromStr for Basis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(Basis::Raw),
            "adjusted" | "split_adjusted" => Ok(Basis::Adjusted),
            other => Err(Error::InvalidParameter(format!("unknown basis `{other}`"))),
        }
    }
}

/// One trading day of OHLCV data for one ticker.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradingBar {
    pub ticker: String,
    pub date: NaiveDate,
    pub open: f64,
    pub high: f64,
    pub low: f64,
    pub close: f64,
    pub adj_close: f64,
    pub volume: u64,
}

impl TradingBar {
    /// Builds a bar and checks the OHLC invariants.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        ticker: impl Into<String>,
        date: NaiveDate,
        open: f64,
        high: f64,
        low: f64,
        close: f64,
        adj_close: f64,
        volume: u64,
    ) -> Result<Self> {
        let bar = Self {
            ticker: ticker.into(),
            date,
            open,
            high,
            low,
            close,
            adj_close,
            volume,
        };
        bar.validate()?;
        Ok(bar)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::InvalidBar {
                ticker: self.ticker.clone(),
                date: self.date,
                reason,
            })
        };
        for (name, v) in [
            ("open", self.open),
            ("high", self.high),
            ("low", self.low),
            ("close", self.close),
            ("adj_close", self.adj_close),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return fail(format!("{name} must be a positive finite price, got {v}"));
            }
        }
        if self.high < self.low {
            return fail(format!("high {} < low {}", self.high, self.low));
        }
        if self.low > self.open.min(self.close) {
            return fail(format!(
                "low {} above min(open, close) {}",
                self.low,
                self.open.min(self.close)
            ));
        }
        if self.high < self.open.max(self.close) {
            return fail(format!(
                "high {} below max(open, close) {}",
                self.high,
                self.open.max(self.close)
            ));
        }
        Ok(())
    }

    /// Daily price range (high - low) in raw quote units.
    pub fn gap(&self) -> f64 {
        self.high - self.low
    }

    /// Cumulative split factor implied by the feed: `close / adj_close`.
    /// Greater than one for bars that predate a later split.
    pub fn adjustment_factor(&self) -> f64 {
        self.close / self.adj_close
    }

    /// Closing price: `close` on the raw basis, `adj_close` when adjusted.
    pub fn price(&self, basis: Basis) -> f64 {
        match basis {
            Basis::Raw => self.close,
            Basis::Adjusted => self.adj_close,
        }
    }

    pub fn volume_on(&self, basis: Basis) -> f64 {
        match basis {
            Basis::Raw => self.volume as f64,
            Basis::Adjusted => self.volume as f64 * self.adjustment_factor(),
        }
    }

    pub fn gap_on(&self, basis: Basis) -> f64 {
        match basis {
            Basis::Raw => self.gap(),
            Basis::Adjusted => self.gap() / self.adjustment_factor(),
        }
    }
}

/// A split: `ratio` shares after per share before.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEvent {
    pub ticker: String,
    pub effective_date: NaiveDate,
    pub ratio: f64,
}

impl SplitEvent {
    pub fn new(ticker: impl Into<String>, effective_date: NaiveDate, ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 0.0) {
            return Err(Error::NonPositiveRatio(ratio));
        }
        Ok(Self {
            ticker: ticker.into(),
            effective_date,
            ratio,
        })
    }

    /// A ratio of exactly one is accepted but carries no mechanical effect.
    pub fn is_degenerate(&self) -> bool {
        self.ratio == 1.0
    }

    /// Stable identifier used to key report sections.
    pub fn sample_id(&self) -> String {
        format!("{}@{}", self.ticker, self.effective_date)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundamentalRecord {
    pub ticker: String,
    pub fiscal_year: i32,
    pub net_profit: f64,
    pub shareholders_equity: f64,
}

/// Daily simple returns of a reference series (risk-free or benchmark),
/// keyed by date.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceRateSeries {
    points: Vec<(NaiveDate, f64)>,
}

impl ReferenceRateSeries {
    pub fn new(points: Vec<(NaiveDate, f64)>) -> Result<Self> {
        for pair in points.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::InvalidParameter(format!(
                    "rate dates not strictly increasing at {}",
                    pair[1].0
                )));
            }
        }
        if let Some((d, r)) = points.iter().find(|(_, r)| !r.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite rate {r} on {d}")));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(NaiveDate, f64)] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn rate_on(&self, date: NaiveDate) -> Option<f64> {
        self.points
            .binary_search_by_key(&date, |(d, _)| *d)
            .ok()
            .map(|i| self.points[i].1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    #[test]
    fn bar_invariants() {
        assert!(TradingBar::new("X", d("2013-06-03"), 10.0, 11.0, 9.0, 10.5, 10.5, 1000).is_ok());
        let err = TradingBar::new("X", d("2013-06-03"), 10.0, 9.0, 10.0, 10.5, 10.5, 1).unwrap_err();
        assert!(err.to_string().contains("high 9 < low 10"), "{err}");
        assert!(TradingBar::new("X", d("2013-06-03"), 10.0, 11.0, 10.2, 10.5, 10.5, 1).is_err());
        assert!(TradingBar::new("X", d("2013-06-03"), 10.0, 10.4, 9.0, 10.5, 10.5, 1).is_err());
        assert!(TradingBar::new("X", d("2013-06-03"), 0.0, 11.0, 9.0, 10.5, 10.5, 1).is_err());
    }

    #[test]
    fn split_ratio_must_be_positive() {
        assert!(matches!(
            SplitEvent::new("X", d("2014-01-02"), 0.0),
            Err(Error::NonPositiveRatio(_))
        ));
        assert!(SplitEvent::new("X", d("2014-01-02"), -2.0).is_err());
        assert!(SplitEvent::new("X", d("2014-01-02"), 1.0).unwrap().is_degenerate());
    }

    #[test]
    fn rates_sorted_and_lookup() {
        let s = ReferenceRateSeries::new(vec![(d("2014-01-02"), 0.01), (d("2014-01-03"), -0.02)]).unwrap();
        assert_eq!(s.rate_on(d("2014-01-03")), Some(-0.02));
        assert_eq!(s.rate_on(d("2014-01-04")), None);
        assert!(ReferenceRateSeries::new(vec![(d("2014-01-03"), 0.0), (d("2014-01-03"), 0.0)]).is_err());
    }
}
