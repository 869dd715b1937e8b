//! Experiment harness: configuration, shared pipeline stages and the
//! subcommands behind the `qocsvm` binary.

pub mod commands;
pub mod config;
pub mod pipeline;

pub use config::{ExperimentConfig, ModelKind, RdmMode};
pub use pipeline::HarnessError;
