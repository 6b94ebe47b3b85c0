//! Configuration documents, fixture checks and the commands behind the
//! `metgov` binary.

pub mod checks;
pub mod commands;
pub mod config;
mod error;

pub use error::CliError;
