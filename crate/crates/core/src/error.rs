use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A quantity under/overflowed and the closed form can no longer be trusted.
    #[error("saturation: {0}")]
    Saturation(String),
    /// Thinning produced more candidate points than the per-path budget allows.
    #[error("simulation budget exceeded after {candidates} candidates")]
    SimulationBudget { candidates: u64 },
    /// The net profit condition fails, so the requested quantity is undefined or trivial.
    #[error("refused: {0}")]
    Refused(String),
    /// The claim distribution is outside the tail class the formula needs.
    #[error("tail class error: {0}")]
    Class(String),
    /// A configuration failed to parse or violates an invariant.
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
