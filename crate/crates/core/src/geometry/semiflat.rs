use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::form::symmetry_defect;
use super::{CoordTag, GeometryError, HermitianForm};

/// The semiflat Kähler form `D^2 u / (4 pi L^2)` in `dlog z` coordinates.
pub fn semiflat_form(hessian: &DMatrix<f64>, scale: f64) -> Result<HermitianForm, GeometryError> {
    if !hessian.is_square() {
        return Err(GeometryError::NotSquare { rows: hessian.nrows(), cols: hessian.ncols() });
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(GeometryError::BadScale(scale));
    }
    let defect = symmetry_defect(hessian);
    if defect > 1e-12 * hessian.abs().max().max(1.0) {
        return Err(GeometryError::NotSymmetric(defect));
    }
    let factor = 1.0 / (4.0 * PI * scale * scale);
    let n = hessian.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| Complex64::new(0.5 * (hessian[(i, j)] + hessian[(j, i)]) * factor, 0.0));
    Ok(HermitianForm::from_hermitian(m, vec![CoordTag::TorusLog; n], scale))
}

/// Tangent vectors of a torus fibre at a base point, as complex components
/// `dw(e_k)` in the form's coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberFrame {
    /// `log|z_i|` of the base point.
    pub base: Vec<f64>,
    pub basis: Vec<Vec<Complex64>>,
}

impl FiberFrame {
    /// `d/dtheta_k`, for which `dlog z_j = i delta_jk`.
    pub fn torus(base: Vec<f64>) -> FiberFrame {
        let n = base.len();
        let basis = (0..n)
            .map(|k| (0..n).map(|j| if j == k { Complex64::new(0.0, 1.0) } else { Complex64::new(0.0, 0.0) }).collect())
            .collect();
        FiberFrame { base, basis }
    }

    /// The first `m` torus directions of an `n`-dimensional form.
    pub fn partial_torus(base: Vec<f64>, m: usize) -> FiberFrame {
        let n = base.len();
        let mut frame = FiberFrame::torus(base);
        frame.basis.truncate(m.min(n));
        frame
    }

    pub fn scaled(&self, factors: &[f64]) -> FiberFrame {
        let basis = self.basis.iter().zip(factors).map(|(v, s)| v.iter().map(|z| z * s).collect()).collect();
        FiberFrame { base: self.base.clone(), basis }
    }

    pub fn rank(&self) -> usize {
        let rows = self.basis.len();
        if rows == 0 {
            return 0;
        }
        let cols = self.basis[0].len();
        // Real rank of the span inside R^{2n}.
        let m = DMatrix::from_fn(rows, 2 * cols, |r, c| {
            let z = self.basis[r][c / 2];
            if c % 2 == 0 {
                z.re
            } else {
                z.im
            }
        });
        m.rank(1e-12)
    }
}

/// `max_{i<j} |omega(e_i, e_j)|` over the frame.
pub fn fiber_lagrangian_residual(form: &HermitianForm, frame: &FiberFrame) -> Result<f64, GeometryError> {
    if let Some(v) = frame.basis.iter().find(|v| v.len() != form.dim()) {
        return Err(GeometryError::DimensionMismatch { form: form.dim(), frame: v.len() });
    }
    let mut worst: f64 = 0.0;
    for i in 0..frame.basis.len() {
        for j in i + 1..frame.basis.len() {
            worst = worst.max(form.evaluate(&frame.basis[i], &frame.basis[j]).abs());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseReport {
    /// `Omega(e_1, .., e_n)` for `Omega = dlog z_1 ^ .. ^ dlog z_n`.
    pub value: Complex64,
    /// `-arg Omega(frame)`, in `(-pi, pi]`.
    pub phase: f64,
    /// `|Im(e^{i theta_0} Omega(frame))| / |Omega(frame)|` for the model
    /// phase `theta_0 = -n pi / 2`.
    pub residual: f64,
}

/// Phase of the semiflat holomorphic volume form on a full fibre frame.
pub fn fiber_phase_residual(n: usize, frame: &FiberFrame) -> Result<PhaseReport, GeometryError> {
    if frame.basis.len() != n || frame.basis.iter().any(|v| v.len() != n) {
        return Err(GeometryError::DimensionMismatch { form: n, frame: frame.basis.len() });
    }
    let m = DMatrix::from_fn(n, n, |j, k| frame.basis[k][j]);
    let value = m.determinant();
    let model = Complex64::new(0.0, -1.0).powu(n as u32);
    let residual = (model * value).im.abs() / value.norm();
    Ok(PhaseReport { value, phase: -value.arg(), residual })
}

/// Whether two phases agree modulo `pi`.
pub fn same_phase_mod_pi(a: f64, b: f64, tol: f64) -> bool {
    let d = (a - b).rem_euclid(PI);
    d < tol || PI - d < tol
}
