//! Orchestration for the `dbconv` command: configuration files and presets,
//! single and parallel chain runs, the n-doubling stationarity test,
//! annealing, sampler comparison and histogram output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod histogram;
pub mod presets;

pub use config::{load, ConfigError, RawConfig, RunConfig};
pub use experiment::{execute, CliError, Status, Verb};
