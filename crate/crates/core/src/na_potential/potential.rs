//! Piecewise-affine potentials on the faces of the dual complex.
//!
//! On face `J` with chart coordinates `(x_j)_{j in J}` a potential is a max (or
//! min) of finitely many affine functions `constant + sum_j coeffs_j x_j`.
//!
//! Sign convention: the model function of `D = sum c_i E_i` is
//! `+ sum_{i in J} c_i x_i` on face `J`. It comes from
//! `phi_D(x) = max log|f|_x` over local sections of `O(D)`, whose generator is
//! `prod z_i^{-c_i}`.

use num_traits::Zero;

use crate::scalar::{int, Rational, Scalar};
use crate::skeleton::SncModel;

use super::NaError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffinePiece {
    pub constant: Rational,
    /// One coefficient per entry of the face's index set.
    pub coeffs: Vec<Rational>,
}

impl AffinePiece {
    pub fn evaluate<S: Scalar>(&self, x: &[S]) -> S {
        self.coeffs
            .iter()
            .zip(x)
            .fold(S::from_rational(&self.constant), |acc, (c, v)| acc + &(S::from_rational(c) * v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Envelope {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacePotential {
    pub pieces: Vec<AffinePiece>,
    pub envelope: Envelope,
}

impl FacePotential {
    pub fn affine(piece: AffinePiece) -> Self {
        FacePotential { pieces: vec![piece], envelope: Envelope::Max }
    }

    pub fn evaluate<S: Scalar>(&self, x: &[S]) -> S {
        let mut values = self.pieces.iter().map(|p| p.evaluate(x));
        let first = values.next().expect("face potentials have at least one piece");
        values.fold(first, |acc, v| match self.envelope {
            Envelope::Max if v > acc => v,
            Envelope::Min if v < acc => v,
            _ => acc,
        })
    }
}

/// A piecewise-affine function on the whole complex, one entry per face of
/// the model (in the model's face order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLPotential {
    faces: Vec<FacePotential>,
}

/// Two faces disagree at a point of their common subface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContinuityDefect {
    pub face: usize,
    pub subface: usize,
    /// Chart point of `subface`.
    pub point: Vec<Rational>,
    pub face_value: Rational,
    pub subface_value: Rational,
}

impl PLPotential {
    pub fn from_faces(model: &SncModel, faces: Vec<FacePotential>) -> Result<PLPotential, NaError> {
        if faces.len() != model.faces().len() {
            return Err(NaError::FaceCount { expected: model.faces().len(), got: faces.len() });
        }
        for (k, f) in faces.iter().enumerate() {
            let arity = model.face(k).index_set().len();
            if f.pieces.is_empty() || f.pieces.iter().any(|p| p.coeffs.len() != arity) {
                return Err(NaError::PieceArity { face: k, expected: arity });
            }
        }
        Ok(PLPotential { faces })
    }

    pub fn faces(&self) -> &[FacePotential] {
        &self.faces
    }

    pub fn face(&self, k: usize) -> &FacePotential {
        &self.faces[k]
    }

    /// Value at a full chart point of face `k`.
    pub fn evaluate<S: Scalar>(&self, k: usize, x: &[S]) -> S {
        self.faces[k].evaluate(x)
    }

    /// Adds a constant to every piece.
    pub fn shifted(&self, by: &Rational) -> PLPotential {
        let mut out = self.clone();
        for f in &mut out.faces {
            for p in &mut f.pieces {
                p.constant += by;
            }
        }
        out
    }

    /// Compares every face with each codimension-one subface at the lattice
    /// points `b_i x_i in (1/denom) Z` of the subface.
    pub fn continuity_defect(&self, model: &SncModel, denom: u32) -> Option<ContinuityDefect> {
        for (k, face) in model.faces().iter().enumerate() {
            let set = face.index_set();
            if set.len() < 2 {
                continue;
            }
            for skip in 0..set.len() {
                let sub: Vec<usize> = set.iter().enumerate().filter(|&(j, _)| j != skip).map(|(_, &i)| i).collect();
                let s = model.face_index(&sub).expect("validated models are closed");
                for point in model.lattice_points(s, denom) {
                    let mut full = point.clone();
                    full.insert(skip, Rational::zero());
                    let a: Rational = self.evaluate(k, &full);
                    let b: Rational = self.evaluate(s, &point);
                    if a != b {
                        return Some(ContinuityDefect { face: k, subface: s, point, face_value: a, subface_value: b });
                    }
                }
            }
        }
        None
    }
}

/// The model function of `sum_i c_i E_i`.
pub fn model_function(model: &SncModel, c: &[Rational]) -> Result<PLPotential, NaError> {
    if c.len() != model.divisors().len() {
        return Err(NaError::CoefficientCount { expected: model.divisors().len(), got: c.len() });
    }
    let faces = model
        .faces()
        .iter()
        .map(|f| {
            FacePotential::affine(AffinePiece {
                constant: Rational::zero(),
                coeffs: f.index_set().iter().map(|&i| c[i].clone()).collect(),
            })
        })
        .collect();
    Ok(PLPotential { faces })
}

/// A section of `mL` in monomial form: exponent vectors over all divisors
/// (entries off a face are ignored there) and the valuation of its norm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    pub support: Vec<Vec<u32>>,
    pub norm_exp: Rational,
}

/// `max_j (-val_x(s_j) - norm_exp_j) / m` on each face.
pub fn tropical_fs_potential(model: &SncModel, sections: &[Section], m: u32) -> Result<PLPotential, NaError> {
    if sections.is_empty() {
        return Err(NaError::EmptySections);
    }
    if m == 0 {
        return Err(NaError::ZeroLevel);
    }
    let count = model.divisors().len();
    for (j, s) in sections.iter().enumerate() {
        if s.support.is_empty() || s.support.iter().any(|a| a.len() != count) {
            return Err(NaError::BadSupport { section: j });
        }
    }
    let m = int(m as i64);
    let faces = model
        .faces()
        .iter()
        .map(|f| {
            let mut pieces = Vec::new();
            for s in sections {
                for alpha in &s.support {
                    let piece = AffinePiece {
                        constant: -&s.norm_exp / &m,
                        coeffs: f.index_set().iter().map(|&i| -int(alpha[i] as i64) / &m).collect(),
                    };
                    if !pieces.contains(&piece) {
                        pieces.push(piece);
                    }
                }
            }
            FacePotential { pieces, envelope: Envelope::Max }
        })
        .collect();
    Ok(PLPotential { faces })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MidpointWitness {
    pub y: Vec<Rational>,
    pub z: Vec<Rational>,
    /// `f((y+z)/2) - (f(y)+f(z))/2 > 0`.
    pub excess: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexityReport {
    pub face: usize,
    pub convex: bool,
    pub witness: Option<MidpointWitness>,
}

/// Midpoint test over all pairs of lattice points of face `k` at resolution
/// `denom`. Exact.
pub fn check_face_convexity(potential: &PLPotential, model: &SncModel, k: usize, denom: u32) -> ConvexityReport {
    let points = model.lattice_points(k, denom);
    let values: Vec<Rational> = points.iter().map(|p| potential.evaluate(k, p)).collect();
    let half = crate::scalar::ratio(1, 2);
    for a in 0..points.len() {
        for b in a + 1..points.len() {
            let mid: Vec<Rational> = points[a].iter().zip(&points[b]).map(|(u, v)| (u + v) * &half).collect();
            let excess: Rational = potential.evaluate(k, &mid) - (&values[a] + &values[b]) * &half;
            if excess > Rational::zero() {
                return ConvexityReport {
                    face: k,
                    convex: false,
                    witness: Some(MidpointWitness { y: points[a].clone(), z: points[b].clone(), excess }),
                };
            }
        }
    }
    ConvexityReport { face: k, convex: true, witness: None }
}

/// Values of a function on a regular grid, row-major with the last axis
/// fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledGrid {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridWitness {
    pub center: Vec<usize>,
    pub direction: Vec<i64>,
    pub second_difference: f64,
}

impl SampledGrid {
    pub fn from_fn(shape: &[usize], f: impl Fn(&[usize]) -> f64) -> SampledGrid {
        let total = shape.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut idx = vec![0usize; shape.len()];
        for _ in 0..total {
            values.push(f(&idx));
            for axis in (0..shape.len()).rev() {
                idx[axis] += 1;
                if idx[axis] < shape[axis] {
                    break;
                }
                idx[axis] = 0;
            }
        }
        SampledGrid { shape: shape.to_vec(), values }
    }

    fn offset(&self, idx: &[i64]) -> Option<usize> {
        let mut off = 0usize;
        for (&i, &n) in idx.iter().zip(&self.shape) {
            if i < 0 || i as usize >= n {
                return None;
            }
            off = off * n + i as usize;
        }
        Some(off)
    }

    /// Second differences along every direction in `{-1,0,1}^d`; a value
    /// below `-tol` is a failure.
    pub fn convexity_witness(&self, tol: f64) -> Option<GridWitness> {
        let d = self.shape.len();
        let mut directions = Vec::new();
        for code in 0..3usize.pow(d as u32) {
            let mut dir = Vec::with_capacity(d);
            let mut c = code;
            for _ in 0..d {
                dir.push((c % 3) as i64 - 1);
                c /= 3;
            }
            dir.reverse();
            if dir.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0) {
                directions.push(dir);
            }
        }
        let total: usize = self.shape.iter().product();
        let mut idx = vec![0i64; d];
        for flat in 0..total {
            let mut rem = flat;
            for axis in (0..d).rev() {
                idx[axis] = (rem % self.shape[axis]) as i64;
                rem /= self.shape[axis];
            }
            for dir in &directions {
                let plus: Vec<i64> = idx.iter().zip(dir).map(|(a, b)| a + b).collect();
                let minus: Vec<i64> = idx.iter().zip(dir).map(|(a, b)| a - b).collect();
                if let (Some(p), Some(m)) = (self.offset(&plus), self.offset(&minus)) {
                    let second = self.values[p] + self.values[m] - 2.0 * self.values[flat];
                    if second < -tol {
                        return Some(GridWitness {
                            center: idx.iter().map(|&v| v as usize).collect(),
                            direction: dir.clone(),
                            second_difference: second,
                        });
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use crate::skeleton::{build_model, Divisor};

    fn segment() -> SncModel {
        build_model(vec![Divisor::reduced(0), Divisor::reduced(1)], vec![vec![0], vec![1], vec![0, 1]], 1, true)
            .unwrap()
    }

    fn edge(model: &SncModel) -> usize {
        model.face_index(&[0, 1]).unwrap()
    }

    #[test]
    fn zero_divisor_gives_zero_potential() {
        let m = SncModel::simplex(2, vec![int(0), int(0), int(0)]).unwrap();
        let phi = model_function(&m, &[int(0), int(0), int(0)]).unwrap();
        for k in 0..m.faces().len() {
            for p in m.lattice_points(k, 4) {
                assert!(phi.evaluate::<Rational>(k, &p).is_zero());
            }
        }
    }

    #[test]
    fn segment_model_function_is_one_minus_x1() {
        let m = segment();
        let phi = model_function(&m, &[int(1), int(0)]).unwrap();
        let e = edge(&m);
        for p in m.lattice_points(e, 8) {
            let x1 = p[1].clone();
            assert_eq!(phi.evaluate::<Rational>(e, &p), int(1) - x1);
        }
        assert!(phi.continuity_defect(&m, 8).is_none());
    }

    #[test]
    fn full_fibre_is_constant_one() {
        let m = SncModel::cycle(4).unwrap();
        let phi = model_function(&m, &vec![int(1); 4]).unwrap();
        for k in 0..m.faces().len() {
            for p in m.lattice_points(k, 5) {
                assert_eq!(phi.evaluate::<Rational>(k, &p), int(1));
            }
        }
    }

    #[test]
    fn discontinuity_is_detected() {
        let m = segment();
        let mut phi = model_function(&m, &[int(1), int(0)]).unwrap();
        phi.faces[m.vertex_face(1)].pieces[0].constant = int(1);
        let defect = phi.continuity_defect(&m, 2).unwrap();
        assert_eq!(defect.subface, m.vertex_face(1));
    }

    fn kink_sections() -> Vec<Section> {
        vec![
            Section { support: vec![vec![0, 0]], norm_exp: int(0) },
            Section { support: vec![vec![1, 0]], norm_exp: ratio(-1, 2) },
        ]
    }

    #[test]
    fn fs_potential_of_unit_section_vanishes() {
        let m = segment();
        let phi = tropical_fs_potential(&m, &[Section { support: vec![vec![0, 0]], norm_exp: int(0) }], 1).unwrap();
        for p in m.lattice_points(edge(&m), 6) {
            assert!(phi.evaluate::<Rational>(edge(&m), &p).is_zero());
        }
        assert_eq!(tropical_fs_potential(&m, &[], 1), Err(NaError::EmptySections));
    }

    #[test]
    fn fs_potential_is_max_with_kink_at_half() {
        let m = segment();
        let phi = tropical_fs_potential(&m, &kink_sections(), 1).unwrap();
        let e = edge(&m);
        for p in m.lattice_points(e, 8) {
            let x = p[1].clone();
            let expected = std::cmp::max(int(0), &x - ratio(1, 2));
            assert_eq!(phi.evaluate::<Rational>(e, &p), expected);
        }
        assert!(check_face_convexity(&phi, &m, e, 8).convex);
        assert!(phi.continuity_defect(&m, 8).is_none());
    }

    #[test]
    fn norm_scaling_shifts_by_kappa_over_m() {
        let m = segment();
        let kappa = ratio(3, 5);
        let level = 3;
        let base = tropical_fs_potential(&m, &kink_sections(), level).unwrap();
        let scaled: Vec<Section> = kink_sections()
            .into_iter()
            .map(|s| Section { norm_exp: s.norm_exp + &kappa, ..s })
            .collect();
        let shifted = tropical_fs_potential(&m, &scaled, level).unwrap();
        let e = edge(&m);
        for p in m.lattice_points(e, 6) {
            let diff: Rational = shifted.evaluate::<Rational>(e, &p) - base.evaluate::<Rational>(e, &p);
            assert_eq!(diff, -&kappa / int(level as i64));
        }
    }

    #[test]
    fn concave_kink_has_witness() {
        let m = segment();
        let e = edge(&m);
        let mut phi = tropical_fs_potential(&m, &kink_sections(), 1).unwrap();
        phi.faces[e].envelope = Envelope::Min;
        let report = check_face_convexity(&phi, &m, e, 4);
        assert!(!report.convex);
        assert!(report.witness.unwrap().excess > Rational::zero());
    }

    #[test]
    fn sampled_quadratic_is_convex() {
        let h = 0.05;
        let grid = SampledGrid::from_fn(&[21], |i| (i[0] as f64 * h).powi(2));
        assert!(grid.convexity_witness(1e-12).is_none());
        let grid2 = SampledGrid::from_fn(&[9, 9], |i| {
            let (x, y) = (i[0] as f64 * h, i[1] as f64 * h);
            x * x + x * y + y * y
        });
        assert!(grid2.convexity_witness(1e-12).is_none());
        let saddle = SampledGrid::from_fn(&[9, 9], |i| {
            let (x, y) = (i[0] as f64 * h, i[1] as f64 * h);
            x * x - y * y
        });
        assert!(saddle.convexity_witness(1e-12).is_some());
    }
}
