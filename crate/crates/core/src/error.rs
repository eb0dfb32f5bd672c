use thiserror::Error;

/// Errors raised by the feasibility toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point has no coordinates")]
    EmptyPoint,

    #[error("non-finite coordinate at index {index}")]
    NonFinite { index: usize },

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("projection onto an intersection is not supported")]
    ProjectionUnsupported,

    #[error("distance to the intersection cannot be resolved in closed form")]
    IntersectionUnresolved,

    #[error("intersection members have no common point")]
    InconsistentIntersection,

    #[error("point is not in the set (distance {distance:e})")]
    NotInSet { distance: f64 },

    #[error("invalid operator: {0}")]
    InvalidOperator(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no sample points found in the ball of radius {delta}")]
    NoSamples { delta: f64 },

    #[error("distance to the solution set is unavailable; provide an exact solution set")]
    SolutionDistanceUnavailable,

    #[error("insufficient data: {usable} usable entries, {required} required")]
    InsufficientData { usable: usize, required: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
