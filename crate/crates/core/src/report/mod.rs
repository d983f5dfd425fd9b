//! Report model and its JSON/CSV renderings.
//!
//! Renderers only select and format values already in the report.

mod emit;
mod model;

pub use emit::{emit, format_ratio, render, Rendered, Selector};
pub use model::*;
