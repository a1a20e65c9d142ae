use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("basis dimension {dim} exceeds the configured cap {cap}")]
    CapacityExceeded { dim: u128, cap: usize },

    #[error("mode {mode} is outside the window [-{window}, {window}]")]
    ModeOutOfWindow { mode: i64, window: i64 },

    #[error("projection level {level} is outside 0..={m}")]
    LevelOutOfRange { level: usize, m: usize },

    #[error("shifted index {index} leaves the window [-{window}, {window}]")]
    WindowOverflow { index: i64, window: i64 },

    #[error("operands were built for different model parameters")]
    ParamsMismatch,

    #[error("{what} did not converge after {iterations} iterations")]
    NoConvergence { what: String, iterations: usize },

    #[error("residue weight {residue:e} and eigenvector weight {eigen:e} disagree at atom {atom}")]
    PathDisagreement { atom: f64, residue: f64, eigen: f64 },

    #[error("continued-fraction denominator vanished at level {level}")]
    NearZeroDenominator { level: usize },

    #[error("evaluation point must lie in the open upper half-plane, got Im z = {0}")]
    NotInUpperHalfPlane(f64),

    #[error("spectrum mismatch, symmetric difference {0:?}")]
    SetMismatch(Vec<f64>),

    #[error("tolerance failure: {0}")]
    Tolerance(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbability(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
