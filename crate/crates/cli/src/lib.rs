//! Batch experiment runner behind the `chaintrunc` binary.

pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod run;
pub mod specs;

pub use error::CliError;
pub use experiment::{Experiment, ExperimentConfig};
pub use run::run_experiment;
