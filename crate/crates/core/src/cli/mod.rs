//! Batch surface: configuration, figure presets and result files.

pub mod config;
pub mod figures;
pub mod output;

pub use config::{parse_config, parse_override, OutputFormat, RunConfig};
pub use figures::{reproduce_figure, Figure, FigureReport, Scale};
pub use output::{emit_results, empirical_cdf, preflight, CdfPoint, CDF_COLUMNS};
