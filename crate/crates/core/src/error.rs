use thiserror::Error;

/// Errors raised by the simulator and the bound evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("fields live in different bases")]
    BasisMismatch,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("integration blew up at step {step} (t = {time})")]
    BlowUp { step: usize, time: f64 },

    #[error("delay length {k} is not an integer multiple of the step {dt}")]
    DelayGrid { k: f64, dt: f64 },

    #[error("time {time} outside the stored history [{oldest}, {newest}]")]
    OutOfRange { time: f64, oldest: f64, newest: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("model failed validation: {}", .0.join(", "))]
    InvalidModel(Vec<String>),

    #[error("no admissible decay rate: {0}")]
    Infeasible(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
