use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Duration, NaiveDate};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use super::scenario::{generate_history, weekday_dates, ScenarioSpec};
use crate::data::{
    write_bars, write_fundamentals, write_rates, write_splits, FundamentalRecord, ReferenceRateSeries,
    SplitEvent, TradingBar,
};
use crate::error::{Error, Result};

/// Split ratios of the nine reference samples.
pub const REFERENCE_RATIOS: [f64; 9] = [1.25, 1.1, 1.015, 1.068, 1.569, 2.0, 1.333, 1.011, 4.899];

/// A multi-ticker input set in the same shape as the CSV inputs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Universe {
    pub bars: Vec<TradingBar>,
    pub events: Vec<SplitEvent>,
    pub fundamentals: Vec<FundamentalRecord>,
    pub rates: ReferenceRateSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniverseSpec {
    pub seed: u64,
    pub ratios: Vec<f64>,
    /// Template for every sample; ticker, seed, ratio and start date are overridden.
    pub template: ScenarioSpec,
    /// Calendar days between consecutive samples' start dates.
    pub stagger_days: i64,
    /// Daily reference rate level and dispersion (a short-rate-like series).
    pub rate_level: f64,
    pub rate_noise: f64,
    /// Fiscal years of fundamentals generated after the split year.
    pub fundamentals_years_after: i32,
}

impl Default for UniverseSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            ratios: REFERENCE_RATIOS.to_vec(),
            template: ScenarioSpec::default(),
            stagger_days: 23,
            rate_level: 0.0001,
            rate_noise: 0.00005,
            fundamentals_years_after: 2,
        }
    }
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

/// Generates one history per ratio plus a shared reference-rate series and
/// per-ticker fundamentals. The reference series is drawn independently of
/// every stock.
pub fn generate_universe(spec: &UniverseSpec) -> Result<Universe> {
    if spec.ratios.is_empty() {
        return Err(Error::InvalidParameter("universe needs at least one ratio".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut out = Universe::default();
    for (i, &ratio) in spec.ratios.iter().enumerate() {
        let scenario = ScenarioSpec {
            ticker: format!("S{}", i + 1),
            seed: spec.seed.wrapping_mul(1_000_003).wrapping_add(i as u64),
            split_ratio: ratio,
            start_date: spec.template.start_date + Duration::days(spec.stagger_days * i as i64),
            ..spec.template.clone()
        };
        let h = generate_history(&scenario)?;
        out.fundamentals
            .extend(fundamentals_for(&scenario.ticker, h.event.effective_date.year(), spec.fundamentals_years_after, &mut rng));
        out.bars.extend(h.bars);
        out.events.push(h.event);
    }
    let first = out.bars.iter().map(|b| b.date).min().expect("non-empty universe");
    let last = out.bars.iter().map(|b| b.date).max().expect("non-empty universe");
    let n = (last - first).num_days() as usize + 1;
    let points: Vec<(NaiveDate, f64)> = weekday_dates(first, n)
        .into_iter()
        .take_while(|d| *d <= last)
        .map(|d| {
            let (u1, u2) = (unit(&mut rng), unit(&mut rng));
            let z = libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * std::f64::consts::PI * u2);
            (d, spec.rate_level + spec.rate_noise * z)
        })
        .collect();
    out.rates = ReferenceRateSeries::new(points)?;
    Ok(out)
}

/// Profits and equity from the year before the split through `years_after`.
fn fundamentals_for(ticker: &str, split_year: i32, years_after: i32, rng: &mut ChaCha8Rng) -> Vec<FundamentalRecord> {
    let mut profit = 1_000_000.0 * (0.5 + unit(rng));
    let mut equity = profit * (6.0 + 8.0 * unit(rng));
    (split_year - 1..=split_year + years_after)
        .map(|year| {
            let rec = FundamentalRecord {
                ticker: ticker.to_string(),
                fiscal_year: year,
                net_profit: profit.round(),
                shareholders_equity: equity.round(),
            };
            profit *= 0.7 + 0.7 * unit(rng);
            equity *= 0.95 + 0.15 * unit(rng);
            rec
        })
        .collect()
}

/// Paths of the four CSV files written by [`write_universe`].
#[derive(Debug, Clone)]
pub struct UniverseFiles {
    pub bars: PathBuf,
    pub splits: PathBuf,
    pub fundamentals: PathBuf,
    pub rates: PathBuf,
}

pub fn write_universe(universe: &Universe, dir: &Path) -> Result<UniverseFiles> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let files = UniverseFiles {
        bars: dir.join("bars.csv"),
        splits: dir.join("splits.csv"),
        fundamentals: dir.join("fundamentals.csv"),
        rates: dir.join("rates.csv"),
    };
    let create = |p: &Path| {
        File::create(p).map(BufWriter::new).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })
    };
    write_bars(create(&files.bars)?, &universe.bars)?;
    write_splits(create(&files.splits)?, &universe.events)?;
    write_fundamentals(create(&files.fundamentals)?, &universe.fundamentals)?;
    write_rates(create(&files.rates)?, &universe.rates)?;
    Ok(files)
}
