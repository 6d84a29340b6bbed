//! Method × problem benchmark grid and its table renderers.

mod config;
mod report;
mod tables;

pub use config::{BenchmarkConfig, ConfigError, OutputFormat, PARAM_KEYS};
pub use report::{run_benchmark, BenchmarkReport, CellReport, Metadata, REPORT_DIGITS};
pub use tables::{emit_table1, emit_table2, format_coc, table2_columns, TABLE2_PLACEHOLDER};
