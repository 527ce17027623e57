//! Experiment runner and CSV/SVG report emission.

mod config;
mod csv;
mod experiment;
mod svg;

pub use config::{ExperimentConfig, InputSource, McSettings, PwSource};
pub use csv::{emit_csv, format_sig6};
pub use experiment::{run_experiment, ReportBundle, SchemeReport};
pub use svg::emit_svg;
