//! Projection and reflection methods for two-set feasibility problems,
//! with numerical estimates of the regularity constants that govern their
//! local linear convergence.

pub mod driver;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod regularity;
pub mod sets;

pub use error::{Error, Result};
pub use linalg::{AffineFrame, Point};
pub use operators::OperatorSpec;
pub use regularity::SolutionSet;
pub use sets::SetSpec;
