//! Convex piecewise-linear functions on polytopes, their subgradient
//! Monge–Ampère measures, and a discrete Dirichlet solver.

mod cell;
mod domain;
pub mod linalg;
mod measure;
mod solver;
mod target;

pub use cell::{Face3, Label, Polytope};
pub use domain::Domain;
pub use measure::*;
pub use solver::*;
pub use target::TargetMeasure;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RealMaError {
    #[error("only dimensions 1 to 3 are supported, got {0}")]
    UnsupportedDimension(usize),
    #[error("coordinate dimensions do not match")]
    DimensionMismatch,
    #[error("domain vertices violate its own inequalities or the domain is empty")]
    BadDomain,
    #[error("node {0} lies outside the domain")]
    NodeOutsideDomain(usize),
    #[error("node {0} repeats an earlier node")]
    DuplicateNode(usize),
    #[error("domain vertex {0} is not among the nodes")]
    MissingDomainVertex(usize),
    #[error("non-finite node coordinate or value")]
    NonFinite,
    #[error("no interior nodes")]
    NoInteriorNodes,
}
