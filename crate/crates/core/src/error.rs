use thiserror::Error;

use crate::model::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: String,
        expected: String,
        found: String,
    },

    #[error("factor slots {0:?} are not contiguous in canonical order")]
    NonContiguousSlots(Vec<usize>),

    #[error("{what} is not hermitian (defect {defect:.3e})")]
    NotHermitian { what: String, defect: f64 },

    #[error("negative evaluation time t = {0}")]
    NegativeTime(f64),

    #[error("model has no probe field")]
    ProbeAbsent,

    #[error("bath index {index} out of range ({count} baths)")]
    BathOutOfRange { index: usize, count: usize },

    #[error("trace of updated state is {trace:.3e} (step size too large?)")]
    NonPositiveTrace { trace: f64 },

    #[error("state has trace {trace:.12} instead of 1")]
    NotNormalized { trace: f64 },

    #[error("state is not positive semidefinite (minimum eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("block state incomplete: expected {expected} blocks, found {found}")]
    MissingBlocks { expected: usize, found: usize },

    #[error("model has dissipative couplings or a probe; the closed-system oracle does not apply")]
    DissipativeModel,

    #[error("invalid model: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidModel(Vec<Violation>),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("trajectory {trajectory} failed: {source}")]
    TrajectoryFailed {
        trajectory: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn dims(context: impl Into<String>, expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            context: context.into(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}
