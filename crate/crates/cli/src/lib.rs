//! Benchmark harness: runs the solver library over parameter grids and emits
//! the results as CSV or markdown tables.

pub mod commands;
pub mod error;
pub mod table;

pub use error::CliError;
pub use table::{Cell, Precision, Report, Table};
