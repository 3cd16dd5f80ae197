//! Monte Carlo experiments on local models `prod z_i^{b_i} = t` near a
//! stratum `E_J`: the pushforward of the Calabi–Yau measure under the
//! logarithm map and the growth order of its total mass.

mod polynomial;
mod sampling;
mod stats;

pub use polynomial::*;
pub use sampling::*;
pub use stats::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HybridError {
    #[error("need 0 < |t| < 1, got |t| = {0}")]
    BadT(f64),
    #[error("multiplicities must be >= 1")]
    BadMultiplicity,
    #[error("a local model needs at least one coordinate")]
    NoCoordinates,
    #[error("u_J vanishes at the origin")]
    VanishingResidue,
    #[error("u_J uses z{used} but the model has {count} coordinates")]
    UnknownVariable { used: usize, count: usize },
    #[error("expected {expected} weights, got {got}")]
    WeightCount { expected: usize, got: usize },
    #[error("weights must be finite and >= 0")]
    BadWeight,
    #[error("need at least two distinct values of |t|")]
    TooFewScales,
    #[error(transparent)]
    Parse(#[from] PolynomialParseError),
}
