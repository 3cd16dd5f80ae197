use std::collections::BTreeMap;

use crate::na_potential::{dj_class, IntersectionTable};
use crate::scalar::{determinant, factorial, Rational, Scalar};
use crate::skeleton::SncModel;

use super::ComparisonError;

/// A potential on the reduced chart of one face, given through its second
/// derivatives and the gradients `g_i = du/dx_i` entering the `D_J` class.
pub trait ChartFunction<S> {
    /// Number of reduced chart coordinates.
    fn dim(&self) -> usize;

    fn hessian(&self, x: &[S]) -> Vec<Vec<S>>;

    /// One entry per divisor meeting the stratum.
    fn gradients(&self, x: &[S]) -> BTreeMap<usize, S>;
}

/// [`ChartFunction`] assembled from closures.
pub struct FnChart<H, G> {
    pub dim: usize,
    pub hessian: H,
    pub gradients: G,
}

impl<S, H, G> ChartFunction<S> for FnChart<H, G>
where
    H: Fn(&[S]) -> Vec<Vec<S>>,
    G: Fn(&[S]) -> BTreeMap<usize, S>,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn hessian(&self, x: &[S]) -> Vec<Vec<S>> {
        (self.hessian)(x)
    }

    fn gradients(&self, x: &[S]) -> BTreeMap<usize, S> {
        (self.gradients)(x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaceDensity<S> {
    pub det: S,
    /// `D_J(x)^{n-p} . E_J`; may be negative.
    pub pairing: S,
    /// `p! det(D^2 u) pairing`, per unit `dx_1 .. dx_p`.
    pub density: S,
}

fn check_dim<S>(model: &SncModel, face: usize, phi: &impl ChartFunction<S>) -> Result<(), ComparisonError> {
    let p = model.face(face).dim();
    if phi.dim() != p {
        return Err(ComparisonError::ChartDimension { expected: p, got: phi.dim() });
    }
    Ok(())
}

/// Density of the lower-face measure formula at a chart point of `face`.
pub fn lower_face_density<S: Scalar>(
    model: &SncModel,
    table: &IntersectionTable,
    bundle: Option<&[Rational]>,
    face: usize,
    phi: &impl ChartFunction<S>,
    x: &[S],
) -> Result<FaceDensity<S>, ComparisonError> {
    check_dim(model, face, phi)?;
    let p = phi.dim();
    let det = determinant(phi.hessian(x));
    let pairing = dj_class(model, table, bundle, &phi.gradients(x), model.face(face).index_set())?.pairing;
    let density = S::from_int(factorial(p) as i64) * &det * &pairing;
    Ok(FaceDensity { det, pairing, density })
}

/// User-supplied residue integrals `int_{E_J} Res(Omega) ^ conj(Res(Omega))`,
/// one positive value per face.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueData<S> {
    values: BTreeMap<Vec<usize>, S>,
}

impl<S: Scalar> ResidueData<S> {
    pub fn new(model: &SncModel, values: BTreeMap<Vec<usize>, S>) -> Result<ResidueData<S>, ComparisonError> {
        let mut sorted = BTreeMap::new();
        for (mut face, v) in values {
            face.sort_unstable();
            if !model.is_face(&face) || face.is_empty() {
                return Err(crate::na_potential::NaError::NotAStratum(face).into());
            }
            if v <= S::zero() {
                return Err(ComparisonError::NonPositiveResidue(face));
            }
            sorted.insert(face, v);
        }
        Ok(ResidueData { values: sorted })
    }

    pub fn get(&self, face: &[usize]) -> Result<&S, ComparisonError> {
        self.values.get(face).ok_or_else(|| ComparisonError::MissingResidue(face.to_vec()))
    }

    pub fn values(&self) -> &BTreeMap<Vec<usize>, S> {
        &self.values
    }

    /// `sum_J residue_J * vol(Delta_J)`, which makes the limit measure a
    /// probability measure.
    pub fn normalization(&self, model: &SncModel) -> S {
        self.values.iter().fold(S::zero(), |acc, (face, v)| {
            let k = model.face_index(face).expect("validated on construction");
            acc + &(v.clone() * &S::from_rational(&model.chart_volume(k)))
        })
    }

    /// Whether all entries agree, as they must for maximal semistable
    /// degenerations.
    pub fn is_uniform(&self) -> bool {
        let mut it = self.values.values();
        match it.next() {
            Some(first) => it.all(|v| (v.clone() - first).abs() <= S::slack(first)),
            None => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeResidual<S> {
    /// `det(D^2 u) (D_J^{n-m} . E_J)`.
    pub lhs: S,
    /// `(L^n) / m! * residue_J / normalization`.
    pub rhs: S,
    pub residual: S,
}

/// Right-hand side `(L^n) / m! * residue_J / normalization` on `face`.
pub fn pde_rhs<S: Scalar>(
    model: &SncModel,
    table: &IntersectionTable,
    face: usize,
    residue: &ResidueData<S>,
) -> Result<S, ComparisonError> {
    let set = model.face(face).index_set();
    let top = S::from_rational(&table.top_power().map_err(crate::na_potential::NaError::from)?);
    let m = S::from_int(factorial(model.face(face).dim()) as i64);
    Ok(top / &m * residue.get(set)? / &residue.normalization(model))
}

/// Residual of the second-order form of the lower-face equation at `x`.
pub fn na_pde_residual<S: Scalar>(
    model: &SncModel,
    table: &IntersectionTable,
    bundle: Option<&[Rational]>,
    face: usize,
    phi: &impl ChartFunction<S>,
    residue: &ResidueData<S>,
    x: &[S],
) -> Result<PdeResidual<S>, ComparisonError> {
    let rhs = pde_rhs(model, table, face, residue)?;
    let d = lower_face_density(model, table, bundle, face, phi, x)?;
    let lhs = d.det * &d.pairing;
    let residual = lhs.clone() - &rhs;
    Ok(PdeResidual { lhs, rhs, residual })
}

/// Top-face residuals for a discrete solution: `mass_k / volume_k - rhs`,
/// with `volume_k` the Lebesgue measure attributed to node `k`.
pub fn discrete_pde_residual(masses: &[f64], volumes: &[f64], rhs: f64) -> Vec<PdeResidual<f64>> {
    masses
        .iter()
        .zip(volumes)
        .map(|(m, v)| {
            let lhs = m / v;
            PdeResidual { lhs, rhs, residual: lhs - rhs }
        })
        .collect()
}

/// The one-dimensional reduction of the Calabi ansatz: a model of dimension
/// `n` whose face `{0, 1}` carries `(F_1^{n-1} . E_J) = (-1)^{n-1}` and no
/// `L` contributions, so that `D_J^{n-1} . E_J = (g_1 - g_0)^{n-1}`; with
/// `g_0 = 0` and `g_1 = u'` this is `(u')^{n-1}`. `(L^n)` is `(n+1)^n / n^{n+1}`.
pub fn calabi_reduction(n: usize) -> (SncModel, IntersectionTable) {
    use crate::na_potential::Monomial;
    use crate::scalar::{int, pow};
    use crate::skeleton::{build_model, Divisor};

    assert!(n >= 1, "dimension must be positive");
    let model = build_model(vec![Divisor::reduced(0), Divisor::reduced(1)], vec![vec![0], vec![1], vec![0, 1]], n, true)
        .expect("segment model is valid");
    let mut t = IntersectionTable::new(n);
    // F_0 = -F_1 on E_J, since F_0 + F_1 is the principal central fibre.
    for a in 0..n {
        for k in 0..n - a {
            let value = if a > 0 { int(0) } else if (n - 1 + k) % 2 == 0 { int(1) } else { int(-1) };
            t.insert(Monomial::new(a, [(0, k), (1, n - 1 - a - k)], &[0, 1]), value).expect("degrees match");
        }
    }
    let top = pow(&int(n as i64 + 1), n) / pow(&int(n as i64), n + 1);
    t.insert(Monomial::top(n), top).expect("degrees match");
    (model, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn calabi_phi(n: usize) -> impl ChartFunction<f64> {
        let e = (n as f64 + 1.0) / n as f64;
        FnChart {
            dim: 1,
            hessian: move |x: &[f64]| vec![vec![e * (e - 1.0) * x[0].powf(e - 2.0)]],
            gradients: move |x: &[f64]| [(0, 0.0), (1, e * x[0].powf(e - 1.0))].into_iter().collect(),
        }
    }

    #[test]
    fn calabi_reduction_solves_the_pde() {
        for n in 1..=6 {
            let (model, table) = calabi_reduction(n);
            let residue = ResidueData::new(&model, [(vec![0, 1], 1.0)].into_iter().collect()).unwrap();
            let face = model.face_index(&[0, 1]).unwrap();
            let phi = calabi_phi(n);
            for k in 1..20 {
                let x = [k as f64 / 20.0];
                let r = na_pde_residual(&model, &table, None, face, &phi, &residue, &x).unwrap();
                assert!(r.residual.abs() <= 1e-12, "n = {n}: {r:?}");
            }
        }
    }

    #[test]
    fn calabi_table_is_consistent() {
        for n in 2..=5 {
            let (model, table) = calabi_reduction(n);
            let report = table.check_consistency(&model);
            assert!(report.is_consistent() && report.checked > 0, "n = {n}: {report:?}");
        }
    }

    #[test]
    fn affine_potential_leaves_the_data_term() {
        let (model, table) = calabi_reduction(2);
        let residue = ResidueData::new(&model, [(vec![0, 1], int(3))].into_iter().collect()).unwrap();
        let face = model.face_index(&[0, 1]).unwrap();
        let phi = FnChart {
            dim: 1,
            hessian: |_: &[Rational]| vec![vec![int(0)]],
            gradients: |_: &[Rational]| [(0, int(0)), (1, int(5))].into_iter().collect(),
        };
        let r = na_pde_residual(&model, &table, None, face, &phi, &residue, &[ratio(1, 2)]).unwrap();
        assert_eq!(r.residual, -ratio(9, 8));
    }

    #[test]
    fn segment_in_a_surface_with_supplied_pairing() {
        // (L . E_J) = 0 and (F_1 . E_J) = -1 give pairing q(g) = g_1.
        let (model, table) = calabi_reduction(2);
        let face = model.face_index(&[0, 1]).unwrap();
        let phi = FnChart {
            dim: 1,
            hessian: |_: &[Rational]| vec![vec![int(2)]],
            gradients: |x: &[Rational]| [(0, int(0)), (1, int(2) * &x[0])].into_iter().collect(),
        };
        let x = ratio(1, 3);
        let d = lower_face_density(&model, &table, None, face, &phi, &[x.clone()]).unwrap();
        assert_eq!(d.density, int(2) * (int(2) * x));
    }

    #[test]
    fn residues_must_be_positive_and_present() {
        let (model, _) = calabi_reduction(2);
        assert!(matches!(
            ResidueData::new(&model, [(vec![0, 1], 0.0)].into_iter().collect()),
            Err(ComparisonError::NonPositiveResidue(_))
        ));
        let r = ResidueData::new(&model, [(vec![1, 0], 2.0)].into_iter().collect()).unwrap();
        assert!(r.is_uniform());
        assert_eq!(r.get(&[0]).unwrap_err(), ComparisonError::MissingResidue(vec![0]));
    }

    #[test]
    fn wrong_chart_dimension() {
        let (model, table) = calabi_reduction(2);
        let phi = FnChart {
            dim: 2,
            hessian: |_: &[f64]| vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            gradients: |_: &[f64]| BTreeMap::new(),
        };
        let face = model.face_index(&[0, 1]).unwrap();
        assert!(matches!(
            lower_face_density(&model, &table, None, face, &phi, &[0.5, 0.5]),
            Err(ComparisonError::ChartDimension { expected: 1, got: 2 })
        ));
    }
}
