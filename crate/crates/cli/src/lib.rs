//! File formats, run manifests and subcommands behind the `magfit` binary.

pub mod args;
pub mod commands;
pub mod error;
pub mod formats;
pub mod manifest;

pub use error::{CliError, EXIT_INPUT, EXIT_NUMERIC};
