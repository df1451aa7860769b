use thiserror::Error;

/// Domain errors surfaced by series operations. Shape mismatches between
/// operands of the same call (different `n_vars` or `trunc_degree`) are
/// programmer errors and assert instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoreError {
    #[error("index {index} out of range for {bound} variables")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("degree {degree} exceeds truncation degree {trunc}")]
    DegreeAboveTruncation { degree: u32, trunc: u32 },

    #[error("operand must be constant-free but has a constant term")]
    ConstantTermPresent,

    #[error("reciprocal requires a nonzero constant term")]
    ZeroConstantTerm,

    #[error("operation requires constant term {expected}, found {found}")]
    WrongConstantTerm { expected: String, found: String },

    #[error("linear part is singular over the rationals")]
    SingularLinearPart,

    #[error("truncation degree {have} insufficient, need at least {need}")]
    TruncationInsufficient { need: u32, have: u32 },

    #[error("system dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}
