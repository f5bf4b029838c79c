//! Sweep harness for the squeezed spin-resonator model: configuration,
//! per-study commands and CSV/JSON output.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{CommandError, Report};
pub use config::RunConfig;
