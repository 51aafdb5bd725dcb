//! Scenario files, shipped cases and command implementations behind the
//! `energy-pile` binary.

pub mod cases;
pub mod commands;
pub mod error;
pub mod observations;
pub mod scenario;

pub use error::{CliError, Result};
