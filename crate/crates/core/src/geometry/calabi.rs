use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::form::{hermitian_defect, symmetry_defect};
use super::{CoordTag, GeometryError, HermitianForm};

/// A function of one positive variable with its first two derivatives.
pub trait RadialFunction {
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
}

/// `u(x) = x^{(n+1)/n}` with exact derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CalabiPotential {
    pub n: usize,
}

impl RadialFunction for CalabiPotential {
    fn d1(&self, x: f64) -> f64 {
        let n = self.n as f64;
        (n + 1.0) / n * x.powf(1.0 / n)
    }

    fn d2(&self, x: f64) -> f64 {
        let n = self.n as f64;
        (n + 1.0) / (n * n) * x.powf(1.0 / n - 1.0)
    }
}

/// Central differences of a black-box function with step
/// `h = eps^{1/3} * scale`.
pub struct FiniteDifference<F> {
    pub f: F,
    pub scale: f64,
}

impl<F: Fn(f64) -> f64> FiniteDifference<F> {
    fn step(&self) -> f64 {
        f64::EPSILON.cbrt() * self.scale
    }
}

impl<F: Fn(f64) -> f64> RadialFunction for FiniteDifference<F> {
    fn d1(&self, x: f64) -> f64 {
        let h = self.step();
        ((self.f)(x + h) - (self.f)(x - h)) / (2.0 * h)
    }

    fn d2(&self, x: f64) -> f64 {
        let h = self.step();
        ((self.f)(x + h) - 2.0 * (self.f)(x) + (self.f)(x - h)) / (h * h)
    }
}

/// `(n+1)^n / n^{n+1}`.
pub fn calabi_constant(n: usize) -> f64 {
    let n = n as f64;
    (n + 1.0).powf(n) / n.powf(n + 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalabiReport {
    /// `u''(x) u'(x)^{n-1}` at each sample point.
    pub values: Vec<f64>,
    /// The value at the first sample point.
    pub constant: f64,
    /// `max |c(x) - c(x_0)|`.
    pub residual: f64,
    /// The constant vanishes, as for affine `u`.
    pub degenerate: bool,
}

/// Tests `u'' (u')^{n-1} = const` along `xs`.
pub fn calabi_ode_residual(n: usize, phi: &impl RadialFunction, xs: &[f64]) -> Result<CalabiReport, GeometryError> {
    if let Some(&x) = xs.iter().find(|&&x| !(x > 0.0)) {
        return Err(GeometryError::NonPositiveX(x));
    }
    let values: Vec<f64> = xs.iter().map(|&x| phi.d2(x) * phi.d1(x).powi(n as i32 - 1)).collect();
    let constant = values.first().copied().unwrap_or(0.0);
    let residual = values.iter().map(|v| (v - constant).abs()).fold(0.0, f64::max);
    Ok(CalabiReport { values, constant, residual, degenerate: constant.abs() < 1e-12 })
}

/// `[[P / (4 pi L), B / L], [B* / L, Q]]`: `m` torus-log directions followed
/// by `n - m` fibre directions.
pub fn generalized_calabi_form(
    p: &DMatrix<f64>,
    q: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    scale: f64,
) -> Result<HermitianForm, GeometryError> {
    let (m, k) = (p.nrows(), q.nrows());
    if !p.is_square() || !q.is_square() {
        return Err(GeometryError::ShapeMismatch("P and Q must be square".into()));
    }
    if b.shape() != (m, k) {
        return Err(GeometryError::ShapeMismatch(format!("B is {:?}, expected ({m}, {k})", b.shape())));
    }
    if !(scale.is_finite() && scale > 0.0) {
        return Err(GeometryError::BadScale(scale));
    }
    let sym = symmetry_defect(p);
    if sym > 1e-12 * p.abs().max().max(1.0) {
        return Err(GeometryError::NotSymmetric(sym));
    }
    let herm = hermitian_defect(q);
    if herm > 1e-12 * q.iter().map(|z| z.norm()).fold(1.0, f64::max) {
        return Err(GeometryError::NotHermitian(herm));
    }
    let n = m + k;
    let base = 1.0 / (4.0 * PI * scale);
    let h = DMatrix::from_fn(n, n, |i, j| match (i < m, j < m) {
        (true, true) => Complex64::new(0.5 * (p[(i, j)] + p[(j, i)]) * base, 0.0),
        (true, false) => b[(i, j - m)] / scale,
        (false, true) => b[(j, i - m)].conj() / scale,
        (false, false) => {
            let (a, c) = (q[(i - m, j - m)], q[(j - m, i - m)].conj());
            (a + c) * 0.5
        }
    });
    let mut tags = vec![CoordTag::TorusLog; m];
    tags.extend(std::iter::repeat_n(CoordTag::Fiber, k));
    Ok(HermitianForm::from_hermitian(h, tags, scale))
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolumeReport {
    /// `(L, det H(L) (4 pi L)^m / (det P det Q) - 1)`.
    pub points: Vec<(f64, f64)>,
    /// Least-squares slope of `log |error|` against `log L`; `None` when
    /// some error vanishes to rounding.
    pub slope: Option<f64>,
}

/// Tests `det H(L) (4 pi L)^m -> det P det Q` as `L -> infinity`.
pub fn volume_identity_check(
    p: &DMatrix<f64>,
    q: &DMatrix<Complex64>,
    b: &DMatrix<Complex64>,
    scales: &[f64],
) -> Result<VolumeReport, GeometryError> {
    if scales.len() < 2 {
        return Err(GeometryError::TooFewScales);
    }
    let m = p.nrows();
    if p.nrows() > 0 && p.clone().cholesky().is_none() {
        return Err(GeometryError::NotPositive("P"));
    }
    if q.nrows() > 0 && q.clone().symmetric_eigenvalues().min() <= 0.0 {
        return Err(GeometryError::NotPositive("Q"));
    }
    let reference = p.determinant() * q.determinant().re;
    let mut points = Vec::with_capacity(scales.len());
    for &l in scales {
        let h = generalized_calabi_form(p, q, b, l)?;
        let value = h.determinant() * (4.0 * PI * l).powi(m as i32);
        points.push((l, value / reference - 1.0));
    }
    let resolvable = points.iter().all(|(_, e)| e.abs() > 1e-13);
    let slope = resolvable.then(|| {
        let xs: Vec<f64> = points.iter().map(|(l, _)| l.ln()).collect();
        let ys: Vec<f64> = points.iter().map(|(_, e)| e.abs().ln()).collect();
        crate::hybrid_mc::least_squares(&xs, &ys).0
    });
    Ok(VolumeReport { points, slope })
}
