//! File-based pipeline around `eseem-mc-core`: simulate, mask, complete,
//! transform and score 2D ESEEM data, and run fidelity sweeps.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use error::{exit, CliError, CliResult};
