//! Experiment plumbing around [`drift_approx_core`]: JSON configuration,
//! parallel Monte Carlo, CSV/JSON output, the published reference tables and
//! the `drift-approx` subcommands.

pub mod commands;
pub mod config;
pub mod output;
pub mod parallel;
pub mod tables;

pub use config::{ExperimentConfig, Overrides, ScenarioId};
