//! Period returns, beta, the demarcation-day baseline and abnormal returns.
//!
//! The abnormal return at horizon `h` trading days is
//!
//! ```text
//! normal            = P(-1) / P(-120)           (pre-event gross return)
//! market_influenced = P(h) / P(0) * beta        (post-event gross return scaled by beta)
//! abnormal          = market_influenced - normal
//! ```
//!
//! With the demarcation baseline, `P(-120)` is replaced by the mean price of
//! the two bars at the midpoint of the 120-day pre-event window.
//!
//! Beta is `Cov(r_ref, r_stock) / Var(r_stock)` by default. The correlation
//! variant `Corr(r_ref, r_stock) / Var(r_stock)` is also available; reports
//! label which one produced each number.

use serde::{Deserialize, Serialize};

use crate::data::{Basis, EventWindow, ReferenceRateSeries, NEAREST_BAR_TOLERANCE};
use crate::error::{Error, Result};

pub const PRE_EVENT_DAYS: i64 = 120;
pub const DEMARCATION_OFFSETS: (i64, i64) = (-61, -60);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaVariant {
    #[default]
    #[serde(alias = "cov")]
    Covariance,
    #[serde(alias = "corr")]
    Correlation,
}

impl std::str::FromStr for BetaVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cov" | "covariance" => Ok(Self::Covariance),
            "corr" | "correlation" => Ok(Self::Correlation),
            other => Err(Error::InvalidParameter(format!("unknown beta variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaEstimate {
    pub beta: f64,
    pub variant: BetaVariant,
    pub n_obs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    PeriodStart,
    Demarcation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnObservation {
    pub period_start: i64,
    pub period_end: i64,
    pub gross_return: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbnormalReturn {
    pub horizon: i64,
    pub baseline: Baseline,
    pub basis: Basis,
    pub beta: BetaEstimate,
    pub normal_return: f64,
    pub market_influenced_return: f64,
    pub abnormal: f64,
}

/// Options for [`abnormal_return`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbnormalOptions {
    pub basis: Basis,
    pub baseline: Baseline,
    pub pre_days: i64,
    pub demarcation: (i64, i64),
}

impl Default for AbnormalOptions {
    fn default() -> Self {
        Self {
            basis: Basis::Adjusted,
            baseline: Baseline::PeriodStart,
            pre_days: PRE_EVENT_DAYS,
            demarcation: DEMARCATION_OFFSETS,
        }
    }
}

pub fn pct_change_series(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::InsufficientData("percent change needs 2 values".into()));
    }
    values
        .windows(2)
        .enumerate()
        .map(|(i, w)| {
            if w[0] == 0.0 {
                Err(Error::ZeroDenominator(i))
            } else {
                Ok((w[1] - w[0]) / w[0])
            }
        })
        .collect()
}

/// Streaming population moments (Welford).
#[derive(Debug, Default, Clone, Copy)]
struct Moments {
    n: f64,
    mean_x: f64,
    mean_y: f64,
    m2_x: f64,
    m2_y: f64,
    c_xy: f64,
}

impl Moments {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        let dx = x - self.mean_x;
        let dy = y - self.mean_y;
        self.mean_x += dx / self.n;
        self.mean_y += dy / self.n;
        self.m2_x += dx * (x - self.mean_x);
        self.m2_y += dy * (y - self.mean_y);
        self.c_xy += dx * (y - self.mean_y);
    }

    fn of(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                left: xs.len(),
                right: ys.len(),
            });
        }
        if xs.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "moments need at least 2 observations, got {}",
                xs.len()
            )));
        }
        let mut m = Moments::default();
        for (&x, &y) in xs.iter().zip(ys) {
            m.push(x, y);
        }
        Ok(m)
    }

    fn var_x(&self) -> f64 {
        self.m2_x / self.n
    }

    fn var_y(&self) -> f64 {
        self.m2_y / self.n
    }

    fn cov(&self) -> f64 {
        self.c_xy / self.n
    }
}

/// Population variance (divides by n).
pub fn variance(xs: &[f64]) -> Result<f64> {
    Ok(Moments::of(xs, xs)?.var_x())
}

/// Population covariance (divides by n).
pub fn covariance(xs: &[f64], ys: &[f64]) -> Result<f64> {
    Ok(Moments::of(xs, ys)?.cov())
}

/// Beta of the stock against the reference series.
pub fn beta(stock_returns: &[f64], reference_returns: &[f64], variant: BetaVariant) -> Result<BetaEstimate> {
    let m = Moments::of(reference_returns, stock_returns)?;
    let var_stock = m.var_y();
    if var_stock == 0.0 {
        return Err(Error::ZeroVariance("stock returns"));
    }
    let numerator = match variant {
        BetaVariant::Covariance => m.cov(),
        BetaVariant::Correlation => {
            let var_ref = m.var_x();
            if var_ref == 0.0 {
                return Err(Error::ZeroVariance("reference returns"));
            }
            m.cov() / (var_ref * var_stock).sqrt()
        }
    };
    Ok(BetaEstimate {
        beta: numerator / var_stock,
        variant,
        n_obs: stock_returns.len(),
    })
}

/// Estimates beta over the pre-event window `[-pre_days, -1]`.
///
/// Stock returns run between consecutive bars; each is paired with the
/// reference rate on the later bar's date. Dates without a rate are dropped.
pub fn estimate_window_beta(
    window: &EventWindow,
    rates: &ReferenceRateSeries,
    pre_days: i64,
    basis: Basis,
    variant: BetaVariant,
) -> Result<BetaEstimate> {
    let bars: Vec<_> = window.range(-pre_days, -1).map(|(_, b)| b).collect();
    let mut stock = Vec::with_capacity(bars.len());
    let mut reference = Vec::with_capacity(bars.len());
    for pair in bars.windows(2) {
        if let Some(rate) = rates.rate_on(pair[1].date) {
            let p0 = pair[0].price(basis);
            stock.push((pair[1].price(basis) - p0) / p0);
            reference.push(rate);
        }
    }
    if stock.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} paired return observations in the pre-event window",
            stock.len()
        )));
    }
    beta(&stock, &reference, variant)
}

fn price_near(window: &EventWindow, offset: i64, basis: Basis) -> Result<f64> {
    window
        .nearest(offset, NEAREST_BAR_TOLERANCE)
        .map(|(_, b)| b.price(basis))
        .ok_or(Error::MissingBar {
            offset,
            tolerance: NEAREST_BAR_TOLERANCE,
        })
}

/// Gross return `P(end) / P(start)`.
pub fn gross_return(window: &EventWindow, start: i64, end: i64, basis: Basis) -> Result<ReturnObservation> {
    let p0 = price_near(window, start, basis)?;
    let p1 = price_near(window, end, basis)?;
    Ok(ReturnObservation {
        period_start: start,
        period_end: end,
        gross_return: p1 / p0,
    })
}

/// Mean price of the two bars at the midpoint of the pre-event window.
pub fn demarcation_price(window: &EventWindow, offsets: (i64, i64), basis: Basis) -> Result<f64> {
    let a = price_near(window, offsets.0, basis)?;
    let b = price_near(window, offsets.1, basis)?;
    Ok((a + b) / 2.0)
}

pub fn abnormal_return(
    window: &EventWindow,
    horizon_days: i64,
    beta_estimate: BetaEstimate,
    opts: AbnormalOptions,
) -> Result<AbnormalReturn> {
    if horizon_days < 0 {
        return Err(Error::InvalidParameter(format!("negative horizon {horizon_days}")));
    }
    let basis = opts.basis;
    let normal_return = match opts.baseline {
        Baseline::PeriodStart => gross_return(window, -opts.pre_days, -1, basis)?.gross_return,
        Baseline::Demarcation => price_near(window, -1, basis)? / demarcation_price(window, opts.demarcation, basis)?,
    };
    let post = gross_return(window, 0, horizon_days, basis)?.gross_return;
    let market_influenced_return = post * beta_estimate.beta;
    Ok(AbnormalReturn {
        horizon: horizon_days,
        baseline: opts.baseline,
        basis,
        beta: beta_estimate,
        normal_return,
        market_influenced_return,
        abnormal: market_influenced_return - normal_return,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{align_to_event, weekday_series, OffsetCalendar, SplitEvent};
    use crate::synthetic::oracle::oracle_moments;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn window_from_prices(pre: i64, post: i64, price: impl Fn(i64) -> f64) -> EventWindow {
        let n = (pre + post + 1) as usize;
        let closes: Vec<f64> = (0..n).map(|i| price(i as i64 - pre)).collect();
        let bars = weekday_series("X", NaiveDate::from_ymd_opt(2013, 3, 4).unwrap(), &closes, &vec![1; n]);
        let event = SplitEvent::new("X", bars[pre as usize].date, 2.0).unwrap();
        align_to_event(&bars, &event, pre, post, 0.0, OffsetCalendar::Weekdays).unwrap()
    }

    fn unit_beta() -> BetaEstimate {
        BetaEstimate { beta: 1.0, variant: BetaVariant::Covariance, n_obs: 2 }
    }

    #[test]
    fn pct_change_examples() {
        assert_eq!(pct_change_series(&[100.0, 110.0]).unwrap().len(), 1);
        assert!((pct_change_series(&[100.0, 110.0]).unwrap()[0] - 0.1).abs() < 1e-15);
        assert!(pct_change_series(&[3.0; 6]).unwrap().iter().all(|&r| r == 0.0));
        assert!(matches!(pct_change_series(&[1.0, 0.0, 2.0]), Err(Error::ZeroDenominator(1))));
        assert!(pct_change_series(&[1.0]).is_err());
    }

    #[test]
    fn pct_change_matches_loop() {
        let v: Vec<f64> = (0..50).map(|i| 50.0 + ((i * 31) % 17) as f64).collect();
        let got = pct_change_series(&v).unwrap();
        assert_eq!(got.len(), 49);
        for i in 0..49 {
            assert_eq!(got[i], (v[i + 1] - v[i]) / v[i]);
        }
    }

    #[test]
    fn moments_basic() {
        assert_eq!(variance(&[4.0; 7]).unwrap(), 0.0);
        let xs = [1.0, 2.0, 4.0, 8.0];
        assert!((covariance(&xs, &xs).unwrap() - variance(&xs).unwrap()).abs() < 1e-15);
        assert!(matches!(covariance(&xs, &xs[..3]), Err(Error::LengthMismatch { .. })));
        assert!(variance(&[1.0]).is_err());
        // population variance of 1,2,4,8: mean 3.75, var = (7.5625+3.0625+0.0625+18.0625)/4
        assert!((variance(&xs).unwrap() - 7.1875).abs() < 1e-15);
    }

    #[test]
    fn moments_match_two_pass_oracle() {
        let xs: Vec<f64> = (0..97).map(|i| ((i * 7919) % 1009) as f64 / 13.0 - 20.0).collect();
        let ys: Vec<f64> = (0..97).map(|i| ((i * 104729) % 997) as f64 / 7.0 + 3.0).collect();
        let (vx, _, c) = oracle_moments(&xs, &ys).unwrap();
        assert!((variance(&xs).unwrap() - vx).abs() <= 1e-12 * vx);
        assert!((covariance(&xs, &ys).unwrap() - c).abs() <= 1e-12 * c.abs().max(1e-300));
    }

    #[test]
    fn beta_self_is_one() {
        let xs = [0.01, -0.02, 0.005, 0.03, -0.01];
        assert!((beta(&xs, &xs, BetaVariant::Covariance).unwrap().beta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beta_orthogonal_is_zero() {
        // stock and reference with exactly zero sample covariance
        let stock = [1.0, -1.0, 1.0, -1.0];
        let reference = [1.0, 1.0, -1.0, -1.0];
        let b = beta(&stock, &reference, BetaVariant::Covariance).unwrap();
        assert!(b.beta.abs() < 1e-12);
        assert_eq!(b.n_obs, 4);
        let b = beta(&stock, &reference, BetaVariant::Correlation).unwrap();
        assert!(b.beta.abs() < 1e-12);
    }

    #[test]
    fn beta_variants_and_errors() {
        let stock = [0.02, -0.01, 0.03, 0.0, -0.02];
        let reference = [0.001, 0.0, 0.002, 0.001, -0.001];
        let (vr, vs, c) = oracle_moments(&reference, &stock).unwrap();
        let cov = beta(&stock, &reference, BetaVariant::Covariance).unwrap();
        let corr = beta(&stock, &reference, BetaVariant::Correlation).unwrap();
        assert!((cov.beta - c / vs).abs() < 1e-12);
        assert!((corr.beta - c / (vr * vs).sqrt() / vs).abs() < 1e-9);
        assert!(matches!(beta(&[0.1; 4], &reference[..4], BetaVariant::Covariance), Err(Error::ZeroVariance(_))));
        assert!(matches!(beta(&stock, &[0.0; 5], BetaVariant::Correlation), Err(Error::ZeroVariance(_))));
        assert!(beta(&stock, &reference[..3], BetaVariant::Covariance).is_err());
    }

    #[test]
    fn demarcation_examples() {
        let w = window_from_prices(120, 5, |o| match o {
            -61 => 10.0,
            -60 => 12.0,
            _ => 50.0,
        });
        assert_eq!(demarcation_price(&w, DEMARCATION_OFFSETS, Basis::Adjusted).unwrap(), 11.0);
        let w = window_from_prices(120, 5, |_| 7.5);
        assert_eq!(demarcation_price(&w, DEMARCATION_OFFSETS, Basis::Adjusted).unwrap(), 7.5);
        // linear ramp p(o) = 100 + 0.5 o: midpoint of offsets -61 and -60 is -60.5
        let w = window_from_prices(120, 5, |o| 100.0 + 0.5 * o as f64);
        let p = demarcation_price(&w, DEMARCATION_OFFSETS, Basis::Adjusted).unwrap();
        assert!((p - (100.0 - 0.5 * 60.5)).abs() < 1e-12);
    }

    #[test]
    fn demarcation_is_midpoint_of_120_bar_window() {
        // bars 60 and 61 of the 120-bar pre-event window
        let pre: Vec<i64> = (-120..0).collect();
        assert_eq!((pre[59], pre[60]), DEMARCATION_OFFSETS);
    }

    #[test]
    fn zero_abnormal_when_post_matches_pre() {
        // pre gross return 1.2, post gross 1.2 with beta 1
        let w = window_from_prices(120, 30, |o| match o {
            -120 => 10.0,
            -1 => 12.0,
            0 => 20.0,
            21 => 24.0,
            _ => 15.0,
        });
        let a = abnormal_return(&w, 21, unit_beta(), AbnormalOptions::default()).unwrap();
        assert!(a.abnormal.abs() < 1e-12);
        assert!((a.normal_return - 1.2).abs() < 1e-12);
    }

    #[test]
    fn reproduces_reported_one_month_magnitude() {
        // normal 1.0, post gross 1.3059, beta 1 -> abnormal 0.3059
        let w = window_from_prices(120, 25, |o| match o {
            0 => 100.0,
            21 => 130.59,
            _ => 50.0,
        });
        let a = abnormal_return(&w, 21, unit_beta(), AbnormalOptions::default()).unwrap();
        assert!((100.0 * a.abnormal - 30.59).abs() < 1e-9);
    }

    #[test]
    fn demarcation_baseline() {
        let w = window_from_prices(120, 25, |o| match o {
            -61 => 8.0,
            -60 => 12.0,
            -1 => 11.0,
            _ => 10.0,
        });
        let opts = AbnormalOptions { baseline: Baseline::Demarcation, ..Default::default() };
        let a = abnormal_return(&w, 21, unit_beta(), opts).unwrap();
        assert!((a.normal_return - 1.1).abs() < 1e-12);
        assert!((a.abnormal - (1.0 - 1.1)).abs() < 1e-12);
    }

    #[test]
    fn insufficient_coverage() {
        let w = window_from_prices(30, 10, |_| 10.0);
        assert!(matches!(abnormal_return(&w, 5, unit_beta(), AbnormalOptions::default()), Err(Error::MissingBar { .. })));
        let w = window_from_prices(120, 10, |_| 10.0);
        assert!(abnormal_return(&w, 21, unit_beta(), AbnormalOptions::default()).is_err());
    }

    #[test]
    fn window_beta_pairs_by_date() {
        let w = window_from_prices(120, 0, |o| 100.0 * (1.0 + 0.001 * ((o * o) % 11) as f64));
        let bars: Vec<_> = w.range(-120, -1).map(|(_, b)| b.clone()).collect();
        // reference identical to stock returns on every other date only
        let mut pts = Vec::new();
        for (i, pair) in bars.windows(2).enumerate() {
            if i % 2 == 0 {
                pts.push((pair[1].date, (pair[1].adj_close - pair[0].adj_close) / pair[0].adj_close));
            }
        }
        let rates = ReferenceRateSeries::new(pts.clone()).unwrap();
        let b = estimate_window_beta(&w, &rates, 120, Basis::Adjusted, BetaVariant::Covariance).unwrap();
        assert_eq!(b.n_obs, pts.len());
        assert!((b.beta - 1.0).abs() < 1e-12);
        let empty = ReferenceRateSeries::default();
        assert!(estimate_window_beta(&w, &empty, 120, Basis::Adjusted, BetaVariant::Covariance).is_err());
    }

    proptest! {
        #[test]
        fn covariance_symmetric(xs in prop::collection::vec(-1e3f64..1e3, 2..80), seed in 0usize..1000) {
            let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x * 0.3 + ((i * 31 + seed) % 13) as f64).collect();
            prop_assert!((covariance(&xs, &ys).unwrap() - covariance(&ys, &xs).unwrap()).abs() <= 1e-9 * (1.0 + covariance(&xs, &ys).unwrap().abs()));
        }

        #[test]
        fn horizon_zero_identity(beta_v in -2.0f64..2.0, prices in prop::collection::vec(1.0f64..100.0, 125)) {
            let w = window_from_prices(120, 4, |o| prices[(o + 120) as usize]);
            let est = BetaEstimate { beta: beta_v, variant: BetaVariant::Covariance, n_obs: 2 };
            let a = abnormal_return(&w, 0, est, AbnormalOptions::default()).unwrap();
            prop_assert_eq!(a.market_influenced_return, beta_v);
            prop_assert_eq!(a.abnormal, beta_v - a.normal_return);
        }

        #[test]
        fn compounding_recovers_ratio(prices in prop::collection::vec(0.5f64..500.0, 2..100)) {
            let r = pct_change_series(&prices).unwrap();
            let compounded: f64 = r.iter().map(|x| 1.0 + x).product();
            let ratio = prices.last().unwrap() / prices[0];
            prop_assert!((compounded - ratio).abs() <= 1e-12 * ratio);
        }
    }
}
