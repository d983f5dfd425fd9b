//! Synthetic histories with known ground truth, and brute-force oracles.

pub mod oracle;
mod scenario;
mod universe;

pub use oracle::{oracle_moments, oracle_ols, oracle_sum};
pub use scenario::{generate_history, weekday_dates, ScenarioSpec, SyntheticHistory};
pub use universe::{generate_universe, write_universe, Universe, UniverseFiles, UniverseSpec, REFERENCE_RATIOS};
