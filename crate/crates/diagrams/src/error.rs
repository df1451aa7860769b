use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiagramError {
    #[error("ground set of size {k} exceeds the labeled-enumeration guard ({max})")]
    GroundSetTooLarge { k: usize, max: usize },

    #[error(transparent)]
    Core(#[from] mps_core::CoreError),

    #[error(transparent)]
    Wick(#[from] wick::WickError),
}
