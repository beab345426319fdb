//! Simulation harness, file formats and command line for
//! [`frontier_core`].
//!
//! - [`simkit`]: built-in frontiers and error laws, seeded samples, Monte
//!   Carlo risks and log-log rate fits.
//! - [`io`]: CSV input with design checks, fixed-format CSV/JSON output.
//! - [`config`]: settings merged from defaults, a JSON file and flags.
//! - [`cli`]: the `frontier-adapt` subcommands.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod manifest;
pub mod simkit;

pub use error::AppError;
