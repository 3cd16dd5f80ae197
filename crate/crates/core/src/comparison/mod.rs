//! Checks comparing non-archimedean masses with real Monge–Ampère data.

mod lower_face;
mod mass;
mod matching;
mod vilsmeier;

pub use lower_face::*;
pub use mass::*;
pub use matching::*;
pub use vilsmeier::*;

use crate::na_potential::NaError;
use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ComparisonError {
    #[error(transparent)]
    Na(#[from] NaError),
    #[error("degrees sum to {sum}, but (L) = {expected}")]
    InconsistentDegrees { sum: Rational, expected: Rational },
    #[error("a cycle needs at least 3 components, got {0}")]
    CycleTooShort(usize),
    #[error("faces {0} and {1} do not share a codimension-one face")]
    NotAdjacent(usize, usize),
    #[error("point {0:?} is not on the wall x_0 = 0")]
    OffWall(Vec<f64>),
    #[error("no residue entry for face {0:?}")]
    MissingResidue(Vec<usize>),
    #[error("residue for face {0:?} must be positive")]
    NonPositiveResidue(Vec<usize>),
    #[error("expected a chart function of dimension {expected}, got {got}")]
    ChartDimension { expected: usize, got: usize },
}
