//! Config-driven batch front end for `cavsqueeze-core`.
//!
//! Subcommands `validate`, `effective`, `simulate`, `inout` and `sweep` read
//! one TOML file and write `<command>.csv`, `<command>.json` and
//! `manifest.json` into the output directory. Exit status: 0 success,
//! 2 gate failure, 3 numeric failure, 4 configuration error.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod sweep;

pub use error::CliError;
