//! Experiment runner for the `hmimo` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;

pub use commands::{run, Cli, Command, RunSummary};
pub use config::ExperimentConfig;
pub use error::CliError;
