//! Experiment runner for the edgescale laboratory: configuration, worker
//! pool, output formats and the command implementations behind the
//! `edgescale` binary.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod exec;
pub mod io;
pub mod report;

pub use error::RunError;
pub use exec::RayonExecutor;
