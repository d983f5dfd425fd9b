//! Brute-force reference implementations.
//!
//! Nothing here calls into the analytics modules. The estimators there use
//! streaming (Welford) moments and centred least squares; these use raw
//! power sums, normal equations and plain loops, so agreement between the
//! two is evidence rather than tautology.

use crate::error::{Error, Result};

/// Least-squares line through `points` via the raw normal equations.
/// Returns `(slope, intercept)`.
pub fn oracle_ols(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return Err(Error::InsufficientData("ols oracle needs 2 points".into()));
    }
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let det = n * sxx - sx * sx;
    if det == 0.0 {
        return Err(Error::ZeroVariance("x"));
    }
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy * sxx - sx * sxy) / det;
    Ok((slope, intercept))
}

/// Population moments by two passes: means first, then centred products.
/// Returns `(var_x, var_y, cov_xy)`.
pub fn oracle_moments(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::InsufficientData("moments oracle needs 2 points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut vx = 0.0;
    let mut vy = 0.0;
    let mut c = 0.0;
    for i in 0..xs.len() {
        let dx = xs[i] - mx;
        let dy = ys[i] - my;
        vx += dx * dx;
        vy += dy * dy;
        c += dx * dy;
    }
    Ok((vx / n, vy / n, c / n))
}

pub fn oracle_sum(values: &[f64]) -> f64 {
    let mut total = 0.0;
    for v in values {
        total += v;
    }
    total
}
