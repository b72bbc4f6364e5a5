//! Config-driven front end for the refraction solver.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::{run, RunReport};
pub use config::{CommandName, RunConfig};
pub use error::CliError;
