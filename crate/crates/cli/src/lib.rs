//! Configuration parsing, generator calls and command dispatch for the
//! `ergocube` binary.

pub mod commands;
pub mod config;
pub mod genspec;

pub use commands::{run, CliError, Command, Outcome, RunOptions};
pub use config::{parse_config, to_toml, ConfigError, ExperimentConfig};
