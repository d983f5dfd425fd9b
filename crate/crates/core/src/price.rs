//! Price trajectories, market-value algebra and the high–low gap proxy.

use serde::{Deserialize, Serialize};

use crate::data::{Basis, EventWindow, NEAREST_BAR_TOLERANCE};
use crate::error::{Error, Result};

/// The three fixed offset groups around the split.
pub const PERIOD_GROUPS: [(i64, i64); 3] = [(-91, -31), (-30, 30), (31, 91)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodAverages {
    pub basis: Basis,
    pub g1_avg: f64,
    pub g2_avg: f64,
    pub g3_avg: f64,
    pub counts: [usize; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceChange {
    pub basis: Basis,
    pub lo: i64,
    pub hi: i64,
    /// Offsets of the bars actually used after the nearest-bar rule.
    pub lo_used: i64,
    pub hi_used: i64,
    pub start_price: f64,
    pub end_price: f64,
    pub pct: f64,
}

/// `V2 / V1 = (P2 / P1) * (N2 / N1)` with `N2 / N1` the split ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueFactor {
    pub price_factor: f64,
    pub split_ratio: f64,
    pub value_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapSeries {
    pub basis: Basis,
    pub lo: i64,
    pub hi: i64,
    pub points: Vec<(i64, f64)>,
    pub mean_before: Option<f64>,
    pub mean_after: Option<f64>,
}

pub fn period_averages(window: &EventWindow, basis: Basis) -> Result<PeriodAverages> {
    let mut avgs = [0.0; 3];
    let mut counts = [0usize; 3];
    for (g, &(lo, hi)) in PERIOD_GROUPS.iter().enumerate() {
        let prices: Vec<f64> = window.range(lo, hi).map(|(_, b)| b.price(basis)).collect();
        if prices.is_empty() {
            return Err(Error::EmptyRange { lo, hi });
        }
        counts[g] = prices.len();
        avgs[g] = prices.iter().sum::<f64>() / prices.len() as f64;
    }
    Ok(PeriodAverages {
        basis,
        g1_avg: avgs[0],
        g2_avg: avgs[1],
        g3_avg: avgs[2],
        counts,
    })
}

/// Percent change of the closing price from offset `lo` to offset `hi`,
/// each endpoint resolved by the nearest-bar rule.
pub fn price_change_pct(window: &EventWindow, lo: i64, hi: i64, basis: Basis) -> Result<PriceChange> {
    let endpoint = |o: i64| {
        window
            .nearest(o, NEAREST_BAR_TOLERANCE)
            .ok_or(Error::MissingBar {
                offset: o,
                tolerance: NEAREST_BAR_TOLERANCE,
            })
    };
    let (lo_used, start) = endpoint(lo)?;
    let (hi_used, end) = endpoint(hi)?;
    let (p0, p1) = (start.price(basis), end.price(basis));
    Ok(PriceChange {
        basis,
        lo,
        hi,
        lo_used,
        hi_used,
        start_price: p0,
        end_price: p1,
        pct: 100.0 * (p1 - p0) / p0,
    })
}

pub fn value_factor(price_factor: f64, split_ratio: f64) -> Result<ValueFactor> {
    for (name, v) in [("price factor", price_factor), ("split ratio", split_ratio)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(ValueFactor {
        price_factor,
        split_ratio,
        value_factor: price_factor * split_ratio,
    })
}

/// Daily high − low over `[lo, hi]` with before/after-day-0 means.
pub fn gap_series(window: &EventWindow, lo: i64, hi: i64, basis: Basis) -> Result<GapSeries> {
    let points: Vec<(i64, f64)> = window.range(lo, hi).map(|(o, b)| (o, b.gap_on(basis))).collect();
    if points.is_empty() {
        return Err(Error::EmptyRange { lo, hi });
    }
    let mean = |pred: fn(i64) -> bool| {
        let sel: Vec<f64> = points.iter().filter(|p| pred(p.0)).map(|p| p.1).collect();
        (!sel.is_empty()).then(|| sel.iter().sum::<f64>() / sel.len() as f64)
    };
    Ok(GapSeries {
        basis,
        lo,
        hi,
        mean_before: mean(|o| o < 0),
        mean_after: mean(|o| o > 0),
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{align_to_event, weekday_series, OffsetCalendar, SplitEvent, TradingBar};
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn window_from_prices(pre: i64, post: i64, price: impl Fn(i64) -> f64) -> EventWindow {
        let n = (pre + post + 1) as usize;
        let closes: Vec<f64> = (0..n).map(|i| price(i as i64 - pre)).collect();
        let bars = weekday_series("X", NaiveDate::from_ymd_opt(2013, 3, 4).unwrap(), &closes, &vec![1; n]);
        let event = SplitEvent::new("X", bars[pre as usize].date, 2.0).unwrap();
        align_to_event(&bars, &event, pre, post, 0.0, OffsetCalendar::Weekdays).unwrap()
    }

    #[test]
    fn constant_and_piecewise_groups() {
        let w = window_from_prices(91, 91, |_| 10.0);
        let a = period_averages(&w, Basis::Adjusted).unwrap();
        assert_eq!((a.g1_avg, a.g2_avg, a.g3_avg), (10.0, 10.0, 10.0));
        assert_eq!(a.counts, [61, 61, 61]);
        let w = window_from_prices(91, 91, |o| match o {
            ..=-31 => 10.0,
            -30..=30 => 12.0,
            _ => 11.0,
        });
        let a = period_averages(&w, Basis::Adjusted).unwrap();
        assert_eq!((a.g1_avg, a.g2_avg, a.g3_avg), (10.0, 12.0, 11.0));
    }

    #[test]
    fn group_means_match_loop() {
        let f = |o: i64| 20.0 + ((o * 37).rem_euclid(101)) as f64 / 10.0;
        let w = window_from_prices(91, 91, f);
        let a = period_averages(&w, Basis::Raw).unwrap();
        let mut sums = [0.0; 3];
        let mut ns = [0.0; 3];
        for o in -91i64..=91 {
            let g = if o <= -31 { 0 } else if o <= 30 { 1 } else { 2 };
            sums[g] += f(o);
            ns[g] += 1.0;
        }
        let got = [a.g1_avg, a.g2_avg, a.g3_avg];
        for g in 0..3 {
            assert!((got[g] - sums[g] / ns[g]).abs() < 1e-12);
        }
    }

    #[test]
    fn missing_group_errors() {
        let w = window_from_prices(20, 20, |_| 5.0);
        assert!(matches!(period_averages(&w, Basis::Raw), Err(Error::EmptyRange { .. })));
    }

    #[test]
    fn price_changes() {
        let w = window_from_prices(10, 10, |o| if o < 0 { 10.0 } else { 12.627 });
        let c = price_change_pct(&w, -1, 5, Basis::Adjusted).unwrap();
        assert!((c.pct - 26.27).abs() < 1e-9);
        assert_eq!(price_change_pct(&w, 3, 3, Basis::Adjusted).unwrap().pct, 0.0);
        let w = window_from_prices(3, 3, |o| if o < 0 { 8.0 } else { 4.0 });
        assert_eq!(price_change_pct(&w, -2, 2, Basis::Raw).unwrap().pct, -50.0);
        // outside tolerance
        assert!(matches!(price_change_pct(&w, -2, 7, Basis::Raw), Err(Error::MissingBar { .. })));
        // inside tolerance snaps to the last bar
        let c = price_change_pct(&w, -2, 6, Basis::Raw).unwrap();
        assert_eq!(c.hi_used, 3);
    }

    #[test]
    fn value_factor_examples() {
        assert!((value_factor(0.52, 1.1).unwrap().value_factor - 0.572).abs() < 1e-12);
        assert!((value_factor(0.61, 4.899).unwrap().value_factor - 2.98839).abs() < 1e-12);
        assert_eq!(value_factor(1.0, 1.0).unwrap().value_factor, 1.0);
        assert!(value_factor(0.0, 2.0).is_err());
        assert!(value_factor(1.0, -2.0).is_err());
    }

    #[test]
    fn single_bar_gap() {
        let bar = TradingBar::new("X", NaiveDate::from_ymd_opt(2014, 1, 6).unwrap(), 10.0, 11.0, 9.0, 10.0, 10.0, 1).unwrap();
        let event = SplitEvent::new("X", bar.date, 2.0).unwrap();
        let w = align_to_event(&[bar], &event, 0, 0, 1.0, OffsetCalendar::Weekdays).unwrap();
        let g = gap_series(&w, 0, 0, Basis::Raw).unwrap();
        assert_eq!(g.points, vec![(0, 2.0)]);
        assert_eq!((g.mean_before, g.mean_after), (None, None));
        assert!(gap_series(&w, 1, 5, Basis::Raw).is_err());
    }

    #[test]
    fn raw_gap_halves_adjusted_gap_does_not() {
        // Self-similar series: the latent price is flat, a 2:1 split halves raw quotes.
        let n = 181;
        let start = NaiveDate::from_ymd_opt(2013, 3, 4).unwrap();
        let template = weekday_series("X", start, &vec![20.0; n], &vec![1; n]);
        let bars: Vec<TradingBar> = template
            .into_iter()
            .enumerate()
            .map(|(i, mut b)| {
                let wiggle = 1.0 + 0.1 * ((i * 13 % 7) as f64 / 7.0);
                let (raw, adj) = if i < 90 { (20.0 * wiggle, 10.0 * wiggle) } else { (10.0 * wiggle, 10.0 * wiggle) };
                b.close = raw;
                b.open = raw;
                b.high = raw * 1.02;
                b.low = raw * 0.98;
                b.adj_close = adj;
                b
            })
            .collect();
        let event = SplitEvent::new("X", bars[90].date, 2.0).unwrap();
        let w = align_to_event(&bars, &event, 90, 90, 1.0, OffsetCalendar::Weekdays).unwrap();
        let raw = gap_series(&w, -90, 90, Basis::Raw).unwrap();
        let adj = gap_series(&w, -90, 90, Basis::Adjusted).unwrap();
        let r = raw.mean_after.unwrap() / raw.mean_before.unwrap();
        assert!((r - 0.5).abs() < 0.02, "{r}");
        let r = adj.mean_after.unwrap() / adj.mean_before.unwrap();
        assert!((r - 1.0).abs() < 0.03, "{r}");
        assert!(raw.points.iter().chain(&adj.points).all(|p| p.1 >= 0.0));
    }

    proptest! {
        #[test]
        fn value_factor_algebra(pf in 0.01f64..10.0, r in 0.01f64..10.0) {
            prop_assert_eq!(value_factor(pf, r).unwrap().value_factor, value_factor(r, pf).unwrap().value_factor);
            prop_assert_eq!(value_factor(pf, 1.0).unwrap().value_factor, pf);
            prop_assert_eq!(value_factor(1.0, r).unwrap().value_factor, r);
        }

        #[test]
        fn averages_scale_and_bounds(prices in prop::collection::vec(1.0f64..1000.0, 183), k in 0.1f64..10.0) {
            let w = window_from_prices(91, 91, |o| prices[(o + 91) as usize]);
            let ws = window_from_prices(91, 91, |o| k * prices[(o + 91) as usize]);
            let a = period_averages(&w, Basis::Raw).unwrap();
            let b = period_averages(&ws, Basis::Raw).unwrap();
            for (x, y) in [(a.g1_avg, b.g1_avg), (a.g2_avg, b.g2_avg), (a.g3_avg, b.g3_avg)] {
                prop_assert!((k * x - y).abs() <= 1e-9 * y);
            }
            for (g, &(lo, hi)) in PERIOD_GROUPS.iter().enumerate() {
                let slice = &prices[(lo + 91) as usize..=(hi + 91) as usize];
                let mn = slice.iter().cloned().fold(f64::INFINITY, f64::min);
                let mx = slice.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let avg = [a.g1_avg, a.g2_avg, a.g3_avg][g];
                prop_assert!(avg >= mn - 1e-9 && avg <= mx + 1e-9);
            }
        }

        #[test]
        fn averages_permutation_invariant(prices in prop::collection::vec(1.0f64..1000.0, 183), seed in 0u64..1000) {
            // permute within each group
            let mut permuted = prices.clone();
            for &(lo, hi) in &PERIOD_GROUPS {
                let s = &mut permuted[(lo + 91) as usize..=(hi + 91) as usize];
                let k = (seed as usize) % s.len();
                s.rotate_left(k);
                s.reverse();
            }
            let a = period_averages(&window_from_prices(91, 91, |o| prices[(o + 91) as usize]), Basis::Raw).unwrap();
            let b = period_averages(&window_from_prices(91, 91, |o| permuted[(o + 91) as usize]), Basis::Raw).unwrap();
            prop_assert!((a.g1_avg - b.g1_avg).abs() <= 1e-9 * a.g1_avg);
            prop_assert!((a.g2_avg - b.g2_avg).abs() <= 1e-9 * a.g2_avg);
            prop_assert!((a.g3_avg - b.g3_avg).abs() <= 1e-9 * a.g3_avg);
        }

        #[test]
        fn change_at_same_offset_is_zero(prices in prop::collection::vec(1.0f64..1000.0, 21), o in -10i64..=10) {
            let w = window_from_prices(10, 10, |x| prices[(x + 10) as usize]);
            prop_assert_eq!(price_change_pct(&w, o, o, Basis::Raw).unwrap().pct, 0.0);
        }
    }
}
