use thiserror::Error;

/// Engine-level failures. Configuration and IO errors live in [`crate::config`]
/// and [`crate::runner`].
#[derive(Debug, Error, PartialEq)]
pub enum SaError {
    #[error("field evaluation produced a non-finite value")]
    NonFiniteField,
    #[error("initial parameter lies outside the active set")]
    InitOutsideSet,
    #[error("anchor parameter lies outside K_0")]
    AnchorOutsideSet,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("empty sample set")]
    EmptySamples,
    #[error("dictionary has coincident points")]
    DegenerateDictionary,
    #[error("sufficient statistic has a non-negative component")]
    NonNegativeSufficientStat,
    #[error("importance-sampling draw too close to zero")]
    DegenerateDraw,
    #[error("chain state violates the truncated support")]
    StateOutsideSupport,
    #[error("iteration did not converge within the allowed sweeps")]
    NoConvergence,
    #[error("truncation count exceeded the cap of {cap}; run diverged or is misconfigured")]
    TruncationCapExceeded { cap: usize },
}
