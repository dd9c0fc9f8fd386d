//! Monte Carlo harness, scenario files and CSV output for the `vlcsec`
//! precoder designs.
//!
//! The numerical work lives in `vlc-core`; this crate draws receiver
//! placements, runs the designs in parallel and reduces the results in a
//! thread-count independent order.

pub mod commands;
pub mod config;
pub mod harness;
pub mod output;

pub use config::Config;
pub use harness::{
    run_sweep, CsiMode, Design, ExperimentResult, PointStats, SweepAxis, SweepSpec, Variant,
};
pub use output::Table;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for bad input, 3 for anything that failed while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 3,
        }
    }
}
