//! Command-line front end: stats, sample, degrade, metrics, bench, synth.
//!
//! Every command resolves a [`config::RunConfig`] from an optional TOML (or
//! echoed JSON) file plus flags, runs, and prints one JSON document that
//! embeds the resolved configuration.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{run, Cli};
pub use config::RunConfig;
pub use error::CliError;
