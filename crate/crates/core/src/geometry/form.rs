use nalgebra::DMatrix;
use num_complex::Complex64;

use super::GeometryError;

/// How a coordinate `w_k` of a form is to be read.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordTag {
    /// `w = log z` on a torus direction: `dw = d log|z| + i dtheta`.
    TorusLog,
    /// A holomorphic fibre coordinate.
    Fiber,
}

/// The (1,1)-form `sum_jk H_jk (i/2) dw_j ^ conj(dw_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianForm {
    matrix: DMatrix<Complex64>,
    tags: Vec<CoordTag>,
    /// `L = |log |t||`.
    pub scale: f64,
}

pub(crate) fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).abs().max()
}

pub(crate) fn hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn tolerance(m: &DMatrix<Complex64>) -> f64 {
    1e-12 * m.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

impl HermitianForm {
    /// Hermitian symmetry is checked to `1e-12` relative and then imposed
    /// exactly.
    pub fn new(matrix: DMatrix<Complex64>, tags: Vec<CoordTag>, scale: f64) -> Result<HermitianForm, GeometryError> {
        if !matrix.is_square() {
            return Err(GeometryError::NotSquare { rows: matrix.nrows(), cols: matrix.ncols() });
        }
        if tags.len() != matrix.nrows() {
            return Err(GeometryError::ShapeMismatch(format!("{} tags for {} coordinates", tags.len(), matrix.nrows())));
        }
        let defect = hermitian_defect(&matrix);
        if defect > tolerance(&matrix) {
            return Err(GeometryError::NotHermitian(defect));
        }
        let matrix = (&matrix + matrix.adjoint()).map(|z| z * 0.5);
        Ok(HermitianForm { matrix, tags, scale })
    }

    /// Skips the symmetry check; the caller guarantees `H = H*` exactly.
    pub(crate) fn from_hermitian(matrix: DMatrix<Complex64>, tags: Vec<CoordTag>, scale: f64) -> HermitianForm {
        HermitianForm { matrix, tags, scale }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn tags(&self) -> &[CoordTag] {
        &self.tags
    }

    pub fn smallest_eigenvalue(&self) -> f64 {
        if self.dim() == 0 {
            return f64::INFINITY;
        }
        self.matrix.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Positive definite, judged by the smallest eigenvalue.
    pub fn is_positive(&self) -> bool {
        self.smallest_eigenvalue() > 0.0
    }

    /// `det H`, real for Hermitian `H`.
    pub fn determinant(&self) -> f64 {
        self.matrix.determinant().re
    }

    /// `omega(u, v) = -Im(a^t H conj(b))` for real tangent vectors with
    /// complex components `a = dw(u)`, `b = dw(v)`.
    pub fn evaluate(&self, a: &[Complex64], b: &[Complex64]) -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for j in 0..self.dim() {
            for k in 0..self.dim() {
                s += a[j] * self.matrix[(j, k)] * b[k].conj();
            }
        }
        -s.im
    }

    /// The real antisymmetric `2n x 2n` matrix of the form in the real
    /// coordinates `(Re w_1, Im w_1, Re w_2, ..)`.
    pub fn real_representation(&self) -> DMatrix<f64> {
        let n = self.dim();
        let basis = |a: usize| {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            v[a / 2] = if a % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
            v
        };
        DMatrix::from_fn(2 * n, 2 * n, |a, b| self.evaluate(&basis(a), &basis(b)))
    }

    /// `omega^n / (du_1 dv_1 .. du_n dv_n) = n! det H`.
    pub fn top_wedge(&self) -> f64 {
        crate::scalar::factorial(self.dim()) as f64 * self.determinant()
    }
}
