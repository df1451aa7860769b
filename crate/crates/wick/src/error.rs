use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WickError {
    #[error("covariance matrix is singular over the rationals")]
    SingularCovariance,

    #[error("index {index} out of range for {bound} field components")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("summability violation: {0}")]
    SummabilityViolation(String),
}
