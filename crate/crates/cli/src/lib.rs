//! Config-driven experiments for the feasibility toolkit.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod presets;
pub mod random;
pub mod suite;
pub mod sweep;

pub use config::{parse_config, ExperimentConfig};
pub use error::CliError;
pub use experiment::{run_experiment, ReportDocument, RunOptions};
