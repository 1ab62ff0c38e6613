//! Files, configuration and subcommands around `coherent-core`.
//!
//! Every subcommand reads its inputs from the output directory and writes its
//! own artifacts there, so a run can be resumed or re-reported step by step.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod digest;
pub mod error;
pub mod format;
pub mod judged;

pub use config::{ExperimentConfig, Overrides};
pub use error::{CliError, CliResult};
