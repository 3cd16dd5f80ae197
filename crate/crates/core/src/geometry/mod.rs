//! Hermitian-form algebra in logarithmic coordinates: semiflat metrics,
//! torus-fibre identities, the Calabi ansatz and its generalization.

mod calabi;
mod form;
mod pfaffian;
mod semiflat;

pub use calabi::*;
pub use form::*;
pub use pfaffian::*;
pub use semiflat::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("matrix is not symmetric (defect {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dimension mismatch: form has {form}, frame has {frame}")]
    DimensionMismatch { form: usize, frame: usize },
    #[error("scale must be positive and finite, got {0}")]
    BadScale(f64),
    #[error("sample point {0} is not positive")]
    NonPositiveX(f64),
    #[error("{0} is not positive definite")]
    NotPositive(&'static str),
    #[error("need at least two scales")]
    TooFewScales,
}
