use serde::{Deserialize, Serialize};

use super::types::{SplitEvent, TradingBar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjustMode {
    Prices,
    PricesAndVolume,
}

/// Back-adjusts a raw feed for splits.
///
/// Every bar dated strictly before an event's effective date has its prices
/// divided by the product of the ratios of all later events for its ticker.
/// In [`AdjustMode::PricesAndVolume`] the volume is multiplied by the same
/// product (rounded to whole shares). Bars on or after the last event are
/// returned unchanged.
pub fn split_adjust(bars: &[TradingBar], events: &[SplitEvent], mode: AdjustMode) -> Vec<TradingBar> {
    bars.iter()
        .map(|bar| {
            let factor: f64 = events
                .iter()
                .filter(|e| e.ticker == bar.ticker && bar.date < e.effective_date)
                .map(|e| e.ratio)
                .product();
            if factor == 1.0 {
                return bar.clone();
            }
            let mut out = bar.clone();
            out.open /= factor;
            out.high /= factor;
            out.low /= factor;
            out.close /= factor;
            out.adj_close /= factor;
            if mode == AdjustMode::PricesAndVolume {
                out.volume = (bar.volume as f64 * factor).round() as u64;
            }
            out
        })
        .collect()
}
