//! Event-study analytics for stock splits.
//!
//! The crate covers the full path from CSV inputs to a report:
//!
//! - [`data`]: bars, split events, fundamentals, reference rates; CSV I/O,
//!   split adjustment and alignment onto event-relative trading days.
//! - [`volume`]: before/after volume totals, market-wide shares, trend slopes.
//! - [`price`]: three-period price averages, price changes, market-value
//!   factors and the daily high–low gap.
//! - [`returns`]: percent changes, moments, beta, the demarcation-day
//!   baseline and abnormal returns.
//! - [`fundamentals`]: indexed net profit, ROE, trend agreement.
//! - [`synthetic`]: seeded scenario generator and independent oracles.
//! - [`pipeline`] and [`report`]: orchestration and CSV/JSON emission.

pub mod data;
pub mod error;
pub mod fundamentals;
pub mod pipeline;
pub mod price;
pub mod report;
pub mod returns;
pub mod synthetic;
pub mod volume;

pub use error::{Error, Result};
pub use pipeline::{analyze_universe, run_pipeline, RunConfig};
pub use report::{emit, render, AnalysisReport, Selector};
