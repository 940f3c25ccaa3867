//! Experiment orchestration behind the `skpha` binary.

pub mod checks;
mod commands;
pub mod config;
mod verify;

pub use commands::{replay, resolve_measure, run, Command, Manifest, MeasureSource};
pub use config::{RunConfig, Suite};
pub use verify::{run_suite, CheckResult, VerifyReport};
