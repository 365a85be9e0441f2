//! Command-line front end for the adiabatic switching experiments.

pub mod commands;
pub mod error;
pub mod generator;
pub mod model_file;
pub mod report;

pub use error::CliError;
