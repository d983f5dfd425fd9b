//! Split-year-indexed net profit, ROE, and price/profit/ROE trend agreement.

use rust_decimal::prelude::{FromPrimitive, ToPrimitive};
use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};

use crate::data::FundamentalRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexedProfitRow {
    pub ticker: String,
    pub split_year: i32,
    /// `(fiscal_year, index)` for the split year and every later year present.
    pub values: Vec<(i32, f64)>,
    /// Index of the final year minus 100; absent when that year is missing.
    pub total_diff: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendConsistency {
    pub price_change_pct: f64,
    pub profit_change_pct: f64,
    pub roe_change_pct: f64,
    pub consistent: bool,
}

/// Decimal image of an `f64` via its shortest round-trip representation,
/// so inputs such as `1769.7` are taken at their printed value.
fn decimal(v: f64) -> Result<Decimal> {
    Decimal::from_str_exact(&v.to_string())
        .or_else(|_| Decimal::from_f64(v).ok_or(()))
        .map_err(|_| Error::InvalidParameter(format!("{v} is not representable as a decimal")))
}

/// `100 * profit / base` in decimal arithmetic, rounded once to `f64`.
fn index_value(profit: f64, base: Decimal) -> Result<f64> {
    let hundred = Decimal::ONE_HUNDRED;
    let p = decimal(profit)?;
    let v = hundred
        .checked_mul(p)
        .and_then(|x| x.checked_div(base))
        .ok_or_else(|| Error::InvalidParameter(format!("index of {profit} overflows")))?;
    v.to_f64()
        .ok_or_else(|| Error::InvalidParameter(format!("index of {profit} not finite")))
}

/// Rescales net profit so the split year reads 100, keeping signs.
///
/// `records` are one ticker's filings in any order. Years after
/// `through_year` are ignored; `total_diff` is taken at `through_year` when
/// given (absent if that year has no filing), else at the last year present.
pub fn indexed_net_profit(
    records: &[FundamentalRecord],
    split_year: i32,
    through_year: Option<i32>,
) -> Result<IndexedProfitRow> {
    let base = records
        .iter()
        .find(|r| r.fiscal_year == split_year)
        .ok_or_else(|| Error::MissingRecord(format!("no fundamentals for split year {split_year}")))?;
    if base.net_profit == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "split-year {split_year} net profit is zero; index undefined"
        )));
    }
    let base_dec = decimal(base.net_profit)?;
    let mut rows: Vec<&FundamentalRecord> = records
        .iter()
        .filter(|r| r.fiscal_year >= split_year && through_year.is_none_or(|t| r.fiscal_year <= t))
        .collect();
    rows.sort_by_key(|r| r.fiscal_year);
    let values = rows
        .iter()
        .map(|r| {
            let v = if r.fiscal_year == split_year {
                100.0
            } else {
                index_value(r.net_profit, base_dec)?
            };
            Ok((r.fiscal_year, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let final_year = through_year.or(values.last().map(|v| v.0));
    let total_diff = values
        .iter()
        .find(|(y, _)| Some(*y) == final_year)
        .filter(|(y, _)| *y > split_year)
        .map(|(_, v)| {
            let d = decimal(*v).map(|dv| dv - Decimal::ONE_HUNDRED);
            d.ok().and_then(|d| d.to_f64()).unwrap_or(v - 100.0)
        });
    Ok(IndexedProfitRow {
        ticker: base.ticker.clone(),
        split_year,
        values,
        total_diff,
    })
}

pub fn roe(record: &FundamentalRecord) -> Result<f64> {
    if record.shareholders_equity == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "{} {}: shareholders' equity is zero; ROE undefined",
            record.ticker, record.fiscal_year
        )));
    }
    Ok(record.net_profit / record.shareholders_equity)
}

/// ROE change from `start` to `end` in percentage points.
pub fn roe_change(start: &FundamentalRecord, end: &FundamentalRecord) -> Result<f64> {
    Ok(100.0 * (roe(end)? - roe(start)?))
}

/// The three changes agree when no two carry strictly opposite signs.
/// Zero agrees with either sign; a non-finite input never agrees.
pub fn classify_consistency(price_change_pct: f64, profit_change_pct: f64, roe_change_pct: f64) -> TrendConsistency {
    let all = [price_change_pct, profit_change_pct, roe_change_pct];
    let finite = all.iter().all(|v| v.is_finite());
    let any_pos = all.iter().any(|&v| v > 0.0);
    let any_neg = all.iter().any(|&v| v < 0.0);
    TrendConsistency {
        price_change_pct,
        profit_change_pct,
        roe_change_pct,
        consistent: finite && !(any_pos && any_neg),
    }
}
