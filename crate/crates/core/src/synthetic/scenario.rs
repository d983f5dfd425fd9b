//! Seeded market histories with a known split and known behavioural effects.
//!
//! Stream discipline: one ChaCha8 stream per scenario, seeded from
//! `ScenarioSpec::seed`. Each simulated day consumes, in order, the normals
//! for the latent log-return, the open gap, the volume noise and the
//! reference noise, then two uniforms for the intraday range. Normals come
//! from Box–Muller on two uniforms (the sine branch is discarded) using
//! `libm`, so the floating-point pipeline does not depend on the platform
//! math library. Prices are rounded to 4 decimals and volumes to whole
//! shares.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::data::{ReferenceRateSeries, SplitEvent, TradingBar};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub ticker: String,
    pub seed: u64,
    pub start_date: NaiveDate,
    pub n_days: usize,
    /// Raw close on day 0 of the simulation, in pre-split units.
    pub initial_price: f64,
    /// Expected daily simple return.
    pub daily_drift: f64,
    pub daily_vol: f64,
    pub base_volume: f64,
    /// Log-scale dispersion of daily volume.
    pub volume_noise: f64,
    /// Row index of the split (day 0 of the event).
    pub split_day: usize,
    pub split_ratio: f64,
    /// Volume multiplier on rows `split_day ..= split_day + boost_span`.
    pub announcement_volume_boost: f64,
    pub boost_span: usize,
    /// Extra expected daily return from the split day on.
    pub post_split_drift_shift: f64,
    /// Multiplier on raw share volume from the split day on. `1.0` keeps the
    /// traded share count unchanged; `split_ratio` makes raw volume scale
    /// mechanically with the share count.
    pub split_volume_scale: f64,
    /// Mean intraday high–low range as a fraction of price.
    pub intraday_range: f64,
    /// Noise added to the stock's own daily return to form the reference series.
    pub reference_noise: f64,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        Self {
            ticker: "SYN".into(),
            seed: 0,
            start_date: NaiveDate::from_ymd_opt(2013, 1, 1).unwrap(),
            n_days: 520,
            initial_price: 50.0,
            daily_drift: 0.0,
            daily_vol: 0.015,
            base_volume: 1_000_000.0,
            volume_noise: 0.3,
            split_day: 260,
            split_ratio: 2.0,
            announcement_volume_boost: 1.0,
            boost_span: 30,
            post_split_drift_shift: 0.0,
            split_volume_scale: 1.0,
            intraday_range: 0.02,
            reference_noise: 0.002,
        }
    }
}

/// A generated history: bars, the split event, and a reference-rate series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticHistory {
    pub bars: Vec<TradingBar>,
    pub event: SplitEvent,
    pub rates: ReferenceRateSeries,
}

struct Stream(ChaCha8Rng);

impl Stream {
    /// Uniform on the open interval (0, 1).
    fn uniform(&mut self) -> f64 {
        ((self.0.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * std::f64::consts::PI * u2)
    }
}

fn round4(x: f64) -> f64 {
    libm::round(x * 10_000.0) / 10_000.0
}

/// Consecutive Monday–Friday dates starting on or after `start`.
pub fn weekday_dates(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.n_days < 2 {
            return bad(format!("n_days {} < 2", self.n_days));
        }
        if self.split_day >= self.n_days {
            return bad(format!("split_day {} outside 0..{}", self.split_day, self.n_days));
        }
        for (name, v) in [
            ("initial_price", self.initial_price),
            ("split_ratio", self.split_ratio),
            ("announcement_volume_boost", self.announcement_volume_boost),
            ("split_volume_scale", self.split_volume_scale),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("daily_vol", self.daily_vol),
            ("volume_noise", self.volume_noise),
            ("base_volume", self.base_volume),
            ("reference_noise", self.reference_noise),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if !(0.0..0.5).contains(&self.intraday_range) {
            return bad(format!("intraday_range {} outside [0, 0.5)", self.intraday_range));
        }
        if self.daily_drift <= -1.0 || self.daily_drift + self.post_split_drift_shift <= -1.0 {
            return bad("drift at or below -100% per day".into());
        }
        Ok(())
    }
}

/// Simulates a price/volume history around one split.
///
/// The latent price follows a multiplicative walk with
/// `E[S(t+1) / S(t)] = 1 + drift`. Raw quotes before the split are in
/// pre-split units; from the split day they are divided by the ratio. The
/// adjusted close is always the latent price restated in post-split units.
pub fn generate_history(spec: &ScenarioSpec) -> Result<SyntheticHistory> {
    spec.validate()?;
    let mut rng = Stream(ChaCha8Rng::seed_from_u64(spec.seed));
    let dates = weekday_dates(spec.start_date, spec.n_days);
    let ratio = spec.split_ratio;
    let sigma = spec.daily_vol;

    let mut bars = Vec::with_capacity(spec.n_days);
    let mut rates = Vec::with_capacity(spec.n_days);
    let mut latent = spec.initial_price;
    for (i, &date) in dates.iter().enumerate() {
        let z_price = rng.normal();
        let z_open = rng.normal();
        let z_vol = rng.normal();
        let z_ref = rng.normal();
        let u_high = rng.uniform();
        let u_low = rng.uniform();

        let post = i >= spec.split_day;
        let prev = latent;
        if i > 0 {
            let mu = spec.daily_drift + if post { spec.post_split_drift_shift } else { 0.0 };
            latent = prev * libm::exp(libm::log1p(mu) - 0.5 * sigma * sigma + sigma * z_price);
            rates.push((date, latent / prev - 1.0 + spec.reference_noise * z_ref));
        }
        let open_latent = prev * libm::exp(0.25 * sigma * z_open - 0.03125 * sigma * sigma);

        let unit = if post { ratio } else { 1.0 };
        let open = round4(open_latent / unit);
        let close = round4(latent / unit);
        let high = round4(open.max(close) * (1.0 + spec.intraday_range * u_high));
        let low = round4(open.min(close) * (1.0 - spec.intraday_range * u_low));
        let adj_close = round4(latent / ratio);

        let boost = if post && i <= spec.split_day + spec.boost_span {
            spec.announcement_volume_boost
        } else {
            1.0
        };
        let scale = if post { spec.split_volume_scale } else { 1.0 };
        let noise = libm::exp(spec.volume_noise * z_vol - 0.5 * spec.volume_noise * spec.volume_noise);
        let volume = libm::round(spec.base_volume * boost * scale * noise);

        let bar = TradingBar::new(spec.ticker.clone(), date, open, high, low, close, adj_close, volume as u64)
            .map_err(|e| Error::InvalidParameter(format!("scenario produced an invalid bar: {e}")))?;
        bars.push(bar);
    }
    let event = SplitEvent::new(spec.ticker.clone(), dates[spec.split_day], ratio)?;
    Ok(SyntheticHistory {
        bars,
        event,
        rates: ReferenceRateSeries::new(rates)?,
    })
}
