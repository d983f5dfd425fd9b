//! Trading-volume comparisons and trend lines around the split.

use serde::{Deserialize, Serialize};

use crate::data::{Basis, EventWindow};
use crate::error::{Error, Result};

/// Sum of volumes over `[lo, hi]`, with the fraction of offsets present.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeTotal {
    pub lo: i64,
    pub hi: i64,
    pub basis: Basis,
    pub total: f64,
    pub coverage: f64,
}

/// Before/after volume totals with the before period as the 100% benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeComparison {
    pub span: i64,
    pub basis: Basis,
    pub before_total: f64,
    pub after_total: f64,
    pub after_pct_of_before: f64,
    pub coverage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeShares {
    pub before_share: f64,
    pub after_share: f64,
    pub before_total: f64,
    pub after_total: f64,
    pub samples: usize,
}

/// Least-squares line of volume against offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendFit {
    pub lo: i64,
    pub hi: i64,
    pub basis: Basis,
    pub slope: f64,
    pub intercept: f64,
    /// `100 * slope / mean(volume)`; absent when the mean volume is zero.
    pub normalized_slope_pct: Option<f64>,
    pub n_points: usize,
}

pub fn window_volume_total(window: &EventWindow, lo: i64, hi: i64, basis: Basis) -> Result<VolumeTotal> {
    if lo > hi {
        return Err(Error::InvalidParameter(format!("lo {lo} > hi {hi}")));
    }
    let (wlo, whi) = window.span();
    if hi < wlo || lo > whi {
        return Err(Error::EmptyRange { lo, hi });
    }
    let total = window.range(lo, hi).map(|(_, b)| b.volume_on(basis)).sum();
    Ok(VolumeTotal {
        lo,
        hi,
        basis,
        total,
        coverage: window.coverage_of(lo, hi),
    })
}

/// Compares `[-span, -1]` with `[+1, +span]`; day 0 belongs to neither.
pub fn compare_volume(window: &EventWindow, span: i64, basis: Basis) -> Result<VolumeComparison> {
    if span < 1 {
        return Err(Error::InvalidParameter(format!("span {span} < 1")));
    }
    let before = window_volume_total(window, -span, -1, basis)?;
    let after = window_volume_total(window, 1, span, basis)?;
    let cmp = comparison_from_totals(span, basis, before.total, after.total)?;
    Ok(VolumeComparison {
        coverage: (before.coverage + after.coverage) / 2.0,
        ..cmp
    })
}

/// Builds a comparison from two totals; fails when the benchmark is zero.
pub fn comparison_from_totals(span: i64, basis: Basis, before_total: f64, after_total: f64) -> Result<VolumeComparison> {
    if before_total == 0.0 {
        return Err(Error::ZeroBenchmark);
    }
    Ok(VolumeComparison {
        span,
        basis,
        before_total,
        after_total,
        after_pct_of_before: 100.0 * after_total / before_total,
        coverage: 1.0,
    })
}

/// Pools comparisons into the market-wide before/after split of volume.
pub fn aggregate_volume_share(comparisons: &[VolumeComparison]) -> Result<VolumeShares> {
    if comparisons.is_empty() {
        return Err(Error::InsufficientData("no volume comparisons to aggregate".into()));
    }
    let before: f64 = comparisons.iter().map(|c| c.before_total).sum();
    let after: f64 = comparisons.iter().map(|c| c.after_total).sum();
    let total = before + after;
    if total == 0.0 {
        return Err(Error::ZeroBenchmark);
    }
    let before_share = before / total;
    Ok(VolumeShares {
        before_share,
        after_share: 1.0 - before_share,
        before_total: before,
        after_total: after,
        samples: comparisons.len(),
    })
}

pub fn volume_trend(window: &EventWindow, lo: i64, hi: i64, basis: Basis) -> Result<TrendFit> {
    let points: Vec<(f64, f64)> = window
        .range(lo, hi)
        .map(|(o, b)| (o as f64, b.volume_on(basis)))
        .collect();
    let (slope, intercept, mean_y) = least_squares(&points)?;
    Ok(TrendFit {
        lo,
        hi,
        basis,
        slope,
        intercept,
        normalized_slope_pct: (mean_y != 0.0).then(|| 100.0 * slope / mean_y),
        n_points: points.len(),
    })
}

/// Centred least squares. Returns `(slope, intercept, mean_y)`.
pub fn least_squares(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "trend needs at least 2 points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxx, sxy) = points.iter().fold((0.0, 0.0), |(sxx, sxy), &(x, y)| {
        let dx = x - mean_x;
        (sxx + dx * dx, sxy + dx * (y - mean_y))
    });
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("offsets"));
    }
    let slope = sxy / sxx;
    Ok((slope, mean_y - slope * mean_x, mean_y))
}
