//! Non-archimedean potentials on the dual complex and their Monge–Ampère masses.

mod dj;
mod ma;
mod potential;
mod table;

pub use dj::*;
pub use ma::*;
pub use potential::*;
pub use table::*;

use crate::scalar::Rational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NaError {
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("total mass {computed} differs from (L^n) = {expected}")]
    MassMismatch { computed: Rational, expected: Rational },
    #[error("expected {expected} divisor coefficients, got {got}")]
    CoefficientCount { expected: usize, got: usize },
    #[error("expected one potential per face ({expected}), got {got}")]
    FaceCount { expected: usize, got: usize },
    #[error("face {face} needs nonempty pieces with {expected} coefficients")]
    PieceArity { face: usize, expected: usize },
    #[error("no sections supplied")]
    EmptySections,
    #[error("section level m must be positive")]
    ZeroLevel,
    #[error("section {section} has an empty or malformed support")]
    BadSupport { section: usize },
    #[error("no gradient entry for divisor {0}, which meets the stratum")]
    MissingGradient(usize),
    #[error("stratum {0:?} is not a face of the model")]
    NotAStratum(Vec<usize>),
}
