//! Front end for the `gfra` command: scenario files, sweeps, throughput
//! regions and analytic-versus-simulation validation, all emitted as CSV.

pub mod app;
pub mod backend;
pub mod config;
pub mod error;
pub mod output;
pub mod region;
pub mod sweep;
pub mod validate;

pub use error::{CliError, Result};
