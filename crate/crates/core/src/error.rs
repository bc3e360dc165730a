use thiserror::Error;

pub type Result<T> = std::result::Result<T, SaeError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SaeError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("length mismatch: {what} (expected {expected}, got {actual})")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("area {area}: sample size {n} is too small (need at least {required})")]
    SampleTooSmall {
        area: usize,
        n: usize,
        required: usize,
    },

    #[error("area {area}: known sampling variance D_i is missing or not positive")]
    MissingSamplingVariance { area: usize },

    #[error("weighted design is singular (pivot ratio {ratio:.3e})")]
    Singular { ratio: f64 },

    #[error("objective is not finite at argument {arg}")]
    NonFinite { arg: f64 },

    #[error("invalid distribution parameter: {0}")]
    Distribution(String),

    #[error("estimator {estimator} failed in every replicate: {last_error}")]
    AllReplicatesFailed {
        estimator: String,
        last_error: String,
    },
}
