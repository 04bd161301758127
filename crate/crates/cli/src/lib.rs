//! File formats, presets and subcommands for the `vesselpower` tool.
//!
//! The binary is a thin wrapper over [`commands::run`]; everything it reads
//! or writes goes through [`io`] (CSV) and [`formats`] (JSON).

pub mod cli;
pub mod commands;
pub mod error;
pub mod formats;
pub mod io;
pub mod presets;
pub mod svg;
pub mod verify;

pub use error::CliError;
