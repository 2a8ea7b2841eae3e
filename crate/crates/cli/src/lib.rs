//! Library side of the `entbuffer` command: config parsing, subcommands and
//! output formatting. The binary is a thin clap wrapper around [`commands`].

pub mod commands;
pub mod config;
pub mod error;
pub mod format;

pub use error::{CliError, Result};
