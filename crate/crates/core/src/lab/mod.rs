//! Experiment harness behind the `freedisc` binary.

pub mod config;
mod experiments;
pub mod io;
pub mod registry;

pub use config::Config;
pub use experiments::{constants_table, run_config, run_file, RunOutcome, EXPERIMENTS};
pub use registry::list_registry;
