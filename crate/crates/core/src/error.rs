use crate::kernel::SolveError;

/// Errors raised by the channel, metric and design layers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(&'static str),
    #[error("degenerate channel: receiver is outside every luminaire's field of view")]
    DegenerateChannel,
    #[error("solver failure: {0}")]
    Solver(#[from] SolveError),
    #[error("could not bracket the max-min secrecy energy efficiency")]
    Bracketing,
}

pub type Result<T> = core::result::Result<T, Error>;
