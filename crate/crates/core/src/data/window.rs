//! Event-relative trading-day windows.
//!
//! Offsets count trading days relative to day 0, the first bar dated on or
//! after the split's effective date. Under [`OffsetCalendar::Weekdays`]
//! (the default) the offset of a bar is the signed number of Monday–Friday
//! days between it and the anchor, so a missing row leaves a hole in the
//! offset sequence and lowers coverage. Under [`OffsetCalendar::Rows`] the
//! offset is the signed row distance and only truncation lowers coverage.

use chrono::{Datelike, NaiveDate};
use serde::{Deserialize, Serialize};

use super::types::{SplitEvent, TradingBar};
use crate::error::{Error, Result};

pub const DEFAULT_MIN_COVERAGE: f64 = 0.95;

/// Tolerance, in trading days, for the nearest-bar endpoint rule.
pub const NEAREST_BAR_TOLERANCE: i64 = 3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetCalendar {
    #[default]
    Weekdays,
    Rows,
}

/// Index of `date` on the Monday–Friday calendar. Consecutive weekdays map
/// to consecutive integers. `None` for Saturday and Sunday.
pub fn weekday_index(date: NaiveDate) -> Option<i64> {
    let dow = date.weekday().num_days_from_monday() as i64;
    if dow >= 5 {
        return None;
    }
    // 0001-01-01 is a Monday, so whole weeks start at multiples of 7.
    let days = date.num_days_from_ce() as i64 - 1;
    Some(days.div_euclid(7) * 5 + dow)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventWindow {
    pub event: SplitEvent,
    pub bars: Vec<TradingBar>,
    pub offsets: Vec<i64>,
    pub pre_days: i64,
    pub post_days: i64,
    pub calendar: OffsetCalendar,
    pub coverage: f64,
}

impl EventWindow {
    /// Requested span `[-pre_days, post_days]`.
    pub fn span(&self) -> (i64, i64) {
        (-self.pre_days, self.post_days)
    }

    pub fn anchor(&self) -> Option<&TradingBar> {
        self.bar_at(0)
    }

    pub fn bar_at(&self, offset: i64) -> Option<&TradingBar> {
        self.offsets
            .binary_search(&offset)
            .ok()
            .map(|i| &self.bars[i])
    }

    /// Exact bar at `offset`, else the closest one within `tolerance`
    /// (earlier wins a tie). Returns the offset actually used.
    pub fn nearest(&self, offset: i64, tolerance: i64) -> Option<(i64, &TradingBar)> {
        let i = match self.offsets.binary_search(&offset) {
            Ok(i) => return Some((offset, &self.bars[i])),
            Err(i) => i,
        };
        let below = i.checked_sub(1).map(|j| (offset - self.offsets[j], j));
        let above = (i < self.offsets.len()).then(|| (self.offsets[i] - offset, i));
        let best = match (below, above) {
            (Some(b), Some(a)) => Some(if a.0 < b.0 { a } else { b }),
            (b, a) => b.or(a),
        }?;
        (best.0 <= tolerance).then(|| (self.offsets[best.1], &self.bars[best.1]))
    }

    /// Bars with offset in `[lo, hi]`, paired with their offsets.
    pub fn range(&self, lo: i64, hi: i64) -> impl Iterator<Item = (i64, &TradingBar)> + '_ {
        let start = self.offsets.partition_point(|&o| o < lo);
        let end = self.offsets.partition_point(|&o| o <= hi);
        let end = end.max(start);
        self.offsets[start..end]
            .iter()
            .copied()
            .zip(&self.bars[start..end])
    }

    /// Fraction of integer offsets in `[lo, hi]` that carry a bar.
    pub fn coverage_of(&self, lo: i64, hi: i64) -> f64 {
        if hi < lo {
            return 0.0;
        }
        self.range(lo, hi).count() as f64 / (hi - lo + 1) as f64
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }
}

/// Cuts the bars of `event.ticker` into a window spanning
/// `[-pre_days, +post_days]` trading days around the split.
///
/// `bars` may contain other tickers; they are ignored. The window is
/// returned as long as its coverage reaches `min_coverage`.
pub fn align_to_event(
    bars: &[TradingBar],
    event: &SplitEvent,
    pre_days: i64,
    post_days: i64,
    min_coverage: f64,
    calendar: OffsetCalendar,
) -> Result<EventWindow> {
    if pre_days < 0 || post_days < 0 {
        return Err(Error::InvalidParameter(format!(
            "window days must be non-negative (pre {pre_days}, post {post_days})"
        )));
    }
    if !(0.0..=1.0).contains(&min_coverage) {
        return Err(Error::InvalidParameter(format!(
            "min_coverage {min_coverage} outside [0, 1]"
        )));
    }
    let mut own: Vec<&TradingBar> = bars.iter().filter(|b| b.ticker == event.ticker).collect();
    own.sort_by_key(|b| b.date);
    if let Some(w) = own.windows(2).find(|w| w[0].date == w[1].date) {
        return Err(Error::DuplicateKey(format!("({}, {})", w[0].ticker, w[0].date)));
    }

    let anchor_idx = own
        .iter()
        .position(|b| b.date >= event.effective_date)
        .ok_or_else(|| Error::CannotAnchor {
            ticker: event.ticker.clone(),
            date: event.effective_date,
        })?;

    let offsets: Vec<i64> = match calendar {
        OffsetCalendar::Rows => (0..own.len() as i64).map(|i| i - anchor_idx as i64).collect(),
        OffsetCalendar::Weekdays => {
            let index = |b: &TradingBar| {
                weekday_index(b.date).ok_or_else(|| {
                    Error::InvalidParameter(format!(
                        "{} {} falls on a weekend; use the rows calendar",
                        b.ticker, b.date
                    ))
                })
            };
            let base = index(own[anchor_idx])?;
            own.iter().map(|b| Ok(index(b)? - base)).collect::<Result<_>>()?
        }
    };

    let (lo, hi) = (-pre_days, post_days);
    let mut win_bars = Vec::new();
    let mut win_offsets = Vec::new();
    for (bar, &off) in own.iter().zip(&offsets) {
        if (lo..=hi).contains(&off) {
            win_bars.push((*bar).clone());
            win_offsets.push(off);
        }
    }
    let coverage = win_offsets.len() as f64 / (hi - lo + 1) as f64;
    if coverage < min_coverage {
        return Err(Error::Coverage {
            actual: coverage,
            required: min_coverage,
        });
    }
    Ok(EventWindow {
        event: event.clone(),
        bars: win_bars,
        offsets: win_offsets,
        pre_days,
        post_days,
        calendar,
        coverage,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use chrono::{Duration, Weekday};

    /// Consecutive weekday bars starting at `start` (advanced to a weekday).
    pub(crate) fn weekday_series(ticker: &str, start: NaiveDate, closes: &[f64], vols: &[u64]) -> Vec<TradingBar> {
        let mut date = start;
        let mut out = Vec::with_capacity(closes.len());
        for (&c, &v) in closes.iter().zip(vols) {
            while matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
                date += Duration::days(1);
            }
            out.push(TradingBar {
                ticker: ticker.into(),
                date,
                open: c,
                high: c * 1.01,
                low: c * 0.99,
                close: c,
                adj_close: c,
                volume: v,
            });
            date += Duration::days(1);
        }
        out
    }

    fn d(s: &str) -> NaiveDate {
        s.parse().unwrap()
    }

    #[test]
    fn weekday_index_is_consecutive() {
        let fri = d("2014-06-06");
        let mon = d("2014-06-09");
        assert_eq!(weekday_index(mon).unwrap() - weekday_index(fri).unwrap(), 1);
        assert_eq!(weekday_index(d("2014-06-07")), None);
        assert_eq!(weekday_index(d("0001-01-01")), Some(0));
    }

    #[test]
    fn full_183_window() {
        let bars = weekday_series("X", d("2013-01-01"), &[10.0; 400], &[100; 400]);
        let event = SplitEvent::new("X", bars[200].date, 2.0).unwrap();
        let w = align_to_event(&bars, &event, 91, 91, 0.95, OffsetCalendar::Weekdays).unwrap();
        assert_eq!(w.len(), 183);
        assert_eq!(w.coverage, 1.0);
        assert_eq!(*w.offsets.first().unwrap(), -91);
        assert_eq!(*w.offsets.last().unwrap(), 91);
        assert_eq!(w.anchor().unwrap().date, event.effective_date);
    }

    #[test]
    fn zero_width_window() {
        let bars = weekday_series("X", d("2013-01-01"), &[10.0; 20], &[1; 20]);
        let event = SplitEvent::new("X", bars[7].date, 2.0).unwrap();
        let w = align_to_event(&bars, &event, 0, 0, 0.95, OffsetCalendar::Weekdays).unwrap();
        assert_eq!(w.offsets, vec![0]);
        assert_eq!(w.bars[0].date, bars[7].date);
    }

    #[test]
    fn weekend_effective_date_anchors_next_trading_day() {
        let bars = weekday_series("X", d("2014-06-02"), &[10.0; 20], &[1; 20]);
        let event = SplitEvent::new("X", d("2014-06-07"), 2.0).unwrap();
        let w = align_to_event(&bars, &event, 3, 3, 0.0, OffsetCalendar::Weekdays).unwrap();
        assert_eq!(w.anchor().unwrap().date, d("2014-06-09"));
        assert_eq!(w.bar_at(-1).unwrap().date, d("2014-06-06"));
    }

    #[test]
    fn gapped_series_fails_coverage() {
        // drop every fifth bar: 20% missing
        let full = weekday_series("X", d("2013-01-01"), &[10.0; 400], &[1; 400]);
        let event = SplitEvent::new("X", full[200].date, 2.0).unwrap();
        let gapped: Vec<_> = full
            .iter()
            .enumerate()
            .filter(|(i, _)| *i == 200 || i % 5 != 1)
            .map(|(_, b)| b.clone())
            .collect();
        let err = align_to_event(&gapped, &event, 91, 91, 0.95, OffsetCalendar::Weekdays).unwrap_err();
        match err {
            Error::Coverage { actual, .. } => assert!((actual - 0.8).abs() < 0.01, "{actual}"),
            e => panic!("unexpected {e}"),
        }
        // the rows calendar cannot see interior holes
        let w = align_to_event(&gapped, &event, 91, 91, 0.95, OffsetCalendar::Rows).unwrap();
        assert_eq!(w.coverage, 1.0);
    }

    #[test]
    fn cannot_anchor_after_last_bar() {
        let bars = weekday_series("X", d("2013-01-01"), &[10.0; 5], &[1; 5]);
        let event = SplitEvent::new("X", d("2014-01-01"), 2.0).unwrap();
        assert!(matches!(
            align_to_event(&bars, &event, 1, 1, 0.0, OffsetCalendar::Weekdays),
            Err(Error::CannotAnchor { .. })
        ));
    }

    #[test]
    fn truncated_start_lowers_coverage() {
        let bars = weekday_series("X", d("2013-01-01"), &[10.0; 100], &[1; 100]);
        let event = SplitEvent::new("X", bars[50].date, 2.0).unwrap();
        let w = align_to_event(&bars, &event, 100, 49, 0.0, OffsetCalendar::Weekdays).unwrap();
        assert!((w.coverage - 100.0 / 150.0).abs() < 1e-12);
    }

    #[test]
    fn nearest_rule() {
        let full = weekday_series("X", d("2013-01-01"), &[10.0; 40], &[1; 40]);
        let event = SplitEvent::new("X", full[20].date, 2.0).unwrap();
        let holes: Vec<_> = full
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !(24..=27).contains(i))
            .map(|(_, b)| b)
            .collect();
        let w = align_to_event(&holes, &event, 20, 19, 0.0, OffsetCalendar::Weekdays).unwrap();
        assert_eq!(w.nearest(5, 3).map(|x| x.0), Some(3));
        assert_eq!(w.nearest(6, 3).map(|x| x.0), Some(8));
        assert!(w.nearest(5, 1).is_none());
        assert_eq!(w.range(2, 9).map(|(o, _)| o).collect::<Vec<_>>(), vec![2, 3, 8, 9]);
    }

    proptest::proptest! {
        #[test]
        fn offsets_strictly_increasing_and_contain_zero(
            n in 10usize..200,
            at in 0usize..10,
            pre in 0i64..120,
            post in 0i64..120,
            drop_mask in proptest::collection::vec(proptest::bool::weighted(0.1), 200),
        ) {
            let full = weekday_series("X", d("2013-01-01"), &vec![10.0; n], &vec![1; n]);
            let at = at.min(n - 1);
            let event = SplitEvent::new("X", full[at].date, 2.0).unwrap();
            let bars: Vec<_> = full.into_iter().enumerate()
                .filter(|(i, _)| *i == at || !drop_mask[*i])
                .map(|(_, b)| b).collect();
            for cal in [OffsetCalendar::Weekdays, OffsetCalendar::Rows] {
                let w = align_to_event(&bars, &event, pre, post, 0.0, cal).unwrap();
                proptest::prop_assert!(w.offsets.windows(2).all(|p| p[0] < p[1]));
                proptest::prop_assert!(w.bars.windows(2).all(|p| p[0].date < p[1].date));
                proptest::prop_assert!(w.offsets.contains(&0));
                proptest::prop_assert!((0.0..=1.0).contains(&w.coverage));
            }
        }
    }
}
