use thiserror::Error;

/// Errors produced by the chain, solver, and diagnostic routines.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("state {index} out of range for dimension {dim}")]
    Dimension { index: usize, dim: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("total mass drifted to {mass} (limit 1e-10 before renormalization)")]
    MassDrift { mass: f64 },

    #[error("row {row} has no retained mass under proportional augmentation")]
    DegenerateRow { row: usize },

    #[error("chain structure: {0}")]
    Structure(String),

    #[error("{op} did not converge after {steps} steps (last gap {gap:e})")]
    NonConvergence {
        op: &'static str,
        steps: usize,
        gap: f64,
        /// Last iterate, when the operation produces a vector.
        last: Vec<f64>,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("ill-posed linear system: spectral radius estimate {rho} of the continuation block")]
    IllPosed { rho: f64 },

    #[error("indeterminate ratio: numerator and denominator both vanish at state {state}")]
    Indeterminate { state: usize },

    #[error("internal consistency: {0}")]
    Internal(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
