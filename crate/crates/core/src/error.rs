use thiserror::Error;

/// Errors shared by the engine modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: expected {expected} points, got {got}")]
    GridMismatch { expected: usize, got: usize },

    #[error("characteristics crossed (caustic) at t = {time}")]
    Caustic { time: f64 },

    #[error("integration produced a non-finite state at step {step}")]
    NonFinite { step: usize },

    #[error("CFL violation: dt = {dt} exceeds limit {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("velocity field is not divergence-free (max |div u| = {max_div})")]
    NotSolenoidal { max_div: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
