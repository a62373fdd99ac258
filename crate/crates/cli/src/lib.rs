//! Command-line front end for `nlod-core`: TOML run configs in, tables,
//! JSON or CSV out.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use config::{OutputFormat, RunConfig};
pub use error::CliError;
