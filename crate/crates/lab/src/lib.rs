//! Ensembles, sweeps, run configuration, output files and the verification
//! suite around `acsigma-core`.

pub mod absorb;
pub mod commands;
pub mod config;
pub mod ensemble;
pub mod error;
pub mod output;
pub mod verify;

pub use error::LabError;
