use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InversionError {
    #[error("linear part is singular over the rationals (system is not invertible)")]
    SingularLinearPart,

    #[error("truncation degree {have} insufficient, need at least {need}")]
    TruncationInsufficient { need: u32, have: u32 },

    #[error("resource guard: {0}")]
    ResourceGuard(String),

    #[error(transparent)]
    Core(#[from] mps_core::CoreError),

    #[error(transparent)]
    Wick(#[from] wick::WickError),

    #[error(transparent)]
    Diagram(#[from] diagrams::DiagramError),
}
