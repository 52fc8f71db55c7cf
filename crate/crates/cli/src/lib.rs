//! Experiment harness for the GEU subspace-learning library: configuration,
//! cross-validated comparisons, training-size curves and boundary exports.

pub mod boundary;
pub mod commands;
pub mod config;
pub mod error;
pub mod harness;
pub mod report;

pub use boundary::{run_boundary, run_boundary_on, BoundaryReport};
pub use config::{ExperimentConfig, MethodSpec, UncertaintyKind};
pub use error::CliError;
pub use harness::{run_compare, run_size_curve};
pub use report::{CellSummary, ExperimentReport, ReportKind};

use geu_core::data::load_csv;
use geu_core::Dataset;

/// Load the configured dataset.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Dataset, CliError> {
    let path = cfg.dataset.as_ref().ok_or_else(|| CliError::Config("no dataset configured".into()))?;
    Ok(load_csv(path, &cfg.load_options()?)?)
}
