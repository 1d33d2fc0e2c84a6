use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid scenario space: {0}")]
    InvalidSpace(String),
    #[error("time index {time} out of range for horizon {horizon}")]
    TimeOutOfRange { time: usize, horizon: usize },
    #[error("invalid time pair: t = {t} exceeds s = {s}")]
    TimeOrder { t: usize, s: usize },
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("degenerate dual direction: {0}")]
    DegenerateDirection(String),
    #[error("dual variable is not admissible: {0}")]
    NotAdmissible(String),
    #[error("acceptance set is not decomposable: {0}")]
    NotDecomposable(String),
    #[error("acceptance set is not a cone")]
    NotCone,
    #[error("operation requires every asset to be eligible (m = {m}, d = {d})")]
    NotFullyEligible { m: usize, d: usize },
    #[error("negative scaling factor {0}")]
    NegativeScale(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("linear program failed: {0}")]
    Lp(String),
}

pub type Result<T> = std::result::Result<T, Error>;
