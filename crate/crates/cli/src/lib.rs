//! Batch commands for building, sampling from, validating and visualizing
//! transport maps. The `oit` binary is a thin clap front end over this
//! crate.

pub mod commands;
pub mod config;
pub mod density;
pub mod error;
pub mod export;

pub use config::RunConfig;
pub use density::DensitySpec;
pub use error::{CliError, Result};
