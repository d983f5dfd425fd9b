//! Domain types, CSV ingestion, split adjustment and event alignment.

mod adjust;
pub mod csvio;
mod types;
mod window;

pub use adjust::{split_adjust, AdjustMode};
pub use csvio::{
    parse_bars, parse_fundamentals, parse_rates, parse_splits, read_bars, read_fundamentals,
    read_rates, read_splits, write_bars, write_fundamentals, write_rates, write_splits,
};
pub use types::{Basis, FundamentalRecord, ReferenceRateSeries, SplitEvent, TradingBar};
pub use window::{
    align_to_event, weekday_index, EventWindow, OffsetCalendar, DEFAULT_MIN_COVERAGE,
    NEAREST_BAR_TOLERANCE,
};

#[cfg(test)]
pub(crate) use window::tests::weekday_series;
