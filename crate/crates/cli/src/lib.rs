//! Command-line front end: configuration files, run orchestration, oracle
//! runs, report artifacts and the external-model line protocol.

pub mod commands;
pub mod config;
pub mod error;
pub mod protocol;
pub mod report;

pub use error::CliError;
