//! Command-line front end for chainspread: experiment configs, simulation
//! drivers, ensemble sweeps, fits and verification reports.
//!
//! Every command is a library function so it can be driven from tests
//! without spawning the binary; `main.rs` only parses flags and maps
//! [`CliError`] to exit codes.

pub mod commands;
pub mod config;
pub mod error;
pub mod series;

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
