//! Command-line front end for hyperlasso: dataset generation, chain fitting
//! and persistence, feature ranking, prediction, scale sweeps and LOOCV.

pub mod chain_dir;
pub mod commands;
pub mod config;
pub mod data;
pub mod error;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
