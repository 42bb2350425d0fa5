//! Experiment harness for the popart estimators and sparse bandit algorithms.

pub mod config;
pub mod error;
pub mod experiment;
pub mod matrix_io;
pub mod output;
pub mod svg;

pub use config::{parse_config_file, parse_config_text, ExperimentConfig, Mode, Preset};
pub use error::{CliError, Result};
pub use experiment::{compute, Metric, Outcome, ResultRow};
pub use output::{run_experiment, summarize, ResultFiles, SummaryRow};
