use crate::scalar::{Rational, Scalar};
use crate::skeleton::SncModel;

use super::cell::{Label, Polytope};
use super::RealMaError;

/// A convex polytope `{x : a_i . x <= b_i}` together with its vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain<S> {
    dim: usize,
    facets: Vec<(Vec<S>, S)>,
    vertices: Vec<Vec<S>>,
}

impl<S: Scalar> Domain<S> {
    pub fn new(facets: Vec<(Vec<S>, S)>, vertices: Vec<Vec<S>>) -> Result<Domain<S>, RealMaError> {
        let dim = vertices.first().map_or(0, |v| v.len());
        if dim == 0 || dim > 3 {
            return Err(RealMaError::UnsupportedDimension(dim));
        }
        if vertices.iter().any(|v| v.len() != dim) || facets.iter().any(|(a, _)| a.len() != dim) {
            return Err(RealMaError::DimensionMismatch);
        }
        let d = Domain { dim, facets, vertices };
        if d.vertices.iter().any(|v| !d.contains(v)) {
            return Err(RealMaError::BadDomain);
        }
        Ok(d)
    }

    pub fn interval(lo: S, hi: S) -> Result<Domain<S>, RealMaError> {
        if hi <= lo {
            return Err(RealMaError::BadDomain);
        }
        let one = S::one();
        Domain::new(vec![(vec![-one.clone()], -lo.clone()), (vec![one], hi.clone())], vec![vec![lo], vec![hi]])
    }

    pub fn cuboid(lo: &[S], hi: &[S]) -> Result<Domain<S>, RealMaError> {
        if lo.len() != hi.len() {
            return Err(RealMaError::DimensionMismatch);
        }
        if lo.iter().zip(hi).any(|(a, b)| b <= a) {
            return Err(RealMaError::BadDomain);
        }
        let dim = lo.len();
        let mut facets = Vec::new();
        for k in 0..dim {
            let mut e = vec![S::zero(); dim];
            e[k] = S::one();
            facets.push((e.iter().map(|v| -v.clone()).collect(), -lo[k].clone()));
            facets.push((e, hi[k].clone()));
        }
        let mut vertices = Vec::new();
        for code in 0..(1usize << dim) {
            vertices.push((0..dim).map(|k| if code >> k & 1 == 1 { hi[k].clone() } else { lo[k].clone() }).collect());
        }
        Domain::new(facets, vertices)
    }

    /// Unit simplex `{x >= 0, sum x <= 1}` scaled by weights:
    /// `{x_k >= 0, sum_k w_k x_k <= 1}`.
    pub fn weighted_simplex(weights: &[S]) -> Result<Domain<S>, RealMaError> {
        let dim = weights.len();
        if weights.iter().any(|w| *w <= S::zero()) {
            return Err(RealMaError::BadDomain);
        }
        let mut facets = Vec::new();
        let mut vertices = vec![vec![S::zero(); dim]];
        for k in 0..dim {
            let mut e = vec![S::zero(); dim];
            e[k] = -S::one();
            facets.push((e, S::zero()));
            let mut v = vec![S::zero(); dim];
            v[k] = S::one() / &weights[k];
            vertices.push(v);
        }
        facets.push((weights.to_vec(), S::one()));
        Domain::new(facets, vertices)
    }

    /// The reduced chart of face `k`: coordinates `x_{j_1}, .., x_{j_p}` with
    /// `x_{j_0}` eliminated through `sum b_i x_i = 1`.
    pub fn face_chart(model: &SncModel, k: usize) -> Result<Domain<S>, RealMaError> {
        let set = model.face(k).index_set();
        let weights: Vec<S> =
            set[1..].iter().map(|&i| S::from_rational(&Rational::from_integer((model.multiplicity(i) as i64).into()))).collect();
        Domain::weighted_simplex(&weights)
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn facets(&self) -> &[(Vec<S>, S)] {
        &self.facets
    }

    pub fn vertices(&self) -> &[Vec<S>] {
        &self.vertices
    }

    fn residual(&self, facet: usize, x: &[S]) -> S {
        let (a, b) = &self.facets[facet];
        a.iter().zip(x).fold(S::zero(), |acc, (u, v)| acc + &(u.clone() * v)) - b
    }

    fn facet_slack(&self, facet: usize) -> S {
        let (a, b) = &self.facets[facet];
        S::slack(&a.iter().fold(b.abs(), |acc, v| acc + &v.abs()))
    }

    pub fn contains(&self, x: &[S]) -> bool {
        (0..self.facets.len()).all(|f| self.residual(f, x) <= self.facet_slack(f))
    }

    pub fn on_boundary(&self, x: &[S]) -> bool {
        self.contains(x) && (0..self.facets.len()).any(|f| self.residual(f, x).abs() <= self.facet_slack(f))
    }

    /// `min_i (b_i - a_i . x) / |a_i|_1`: the largest `t` such that every
    /// point within sup-distance `t` of `x` lies in the domain.
    pub fn inner_radius(&self, x: &[S]) -> S {
        let mut best: Option<S> = None;
        for (f, (a, _)) in self.facets.iter().enumerate() {
            let norm = a.iter().fold(S::zero(), |acc, v| acc + &v.abs());
            let t = -self.residual(f, x) / &norm;
            best = Some(match best {
                Some(b) if b <= t => b,
                _ => t,
            });
        }
        best.expect("domains have facets")
    }

    pub fn bounding_box(&self) -> (Vec<S>, Vec<S>) {
        let mut lo = self.vertices[0].clone();
        let mut hi = self.vertices[0].clone();
        for v in &self.vertices {
            for k in 0..self.dim {
                if v[k] < lo[k] {
                    lo[k] = v[k].clone();
                }
                if v[k] > hi[k] {
                    hi[k] = v[k].clone();
                }
            }
        }
        (lo, hi)
    }

    /// The domain as a clipped polytope with facets labelled `Domain(i)`.
    pub fn polytope(&self) -> Polytope<S> {
        let (lo, hi) = self.bounding_box();
        let mut p = Polytope::cube(&lo, &hi);
        for (i, (a, b)) in self.facets.iter().enumerate() {
            p.clip(a, b, Label::Domain(i));
        }
        p
    }

    pub fn volume(&self) -> S {
        self.polytope().volume()
    }

    /// Average of the vertices.
    pub fn centroid(&self) -> Vec<S> {
        let count = S::from_int(self.vertices.len() as i64);
        (0..self.dim).map(|k| self.vertices.iter().fold(S::zero(), |acc, v| acc + &v[k]) / &count).collect()
    }
}

impl Domain<Rational> {
    pub fn to_f64(&self) -> Domain<f64> {
        Domain {
            dim: self.dim,
            facets: self.facets.iter().map(|(a, b)| (a.iter().map(|v| v.as_f64()).collect(), b.as_f64())).collect(),
            vertices: self.vertices.iter().map(|v| v.iter().map(|x| x.as_f64()).collect()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    #[test]
    fn basic_shapes() {
        let sq = Domain::cuboid(&[int(0), int(0)], &[int(1), int(2)]).unwrap();
        assert_eq!(sq.volume(), int(2));
        assert!(sq.on_boundary(&[int(1), ratio(1, 2)]));
        assert!(!sq.on_boundary(&[ratio(1, 2), ratio(1, 2)]));
        assert_eq!(sq.inner_radius(&[ratio(1, 4), int(1)]), ratio(1, 4));
        let tri = Domain::weighted_simplex(&[int(1), int(2)]).unwrap();
        assert_eq!(tri.volume(), ratio(1, 4));
        let cube = Domain::cuboid(&vec![int(0); 3], &vec![int(1); 3]).unwrap();
        assert_eq!(cube.volume(), int(1));
        let tet = Domain::weighted_simplex(&vec![int(1); 3]).unwrap();
        assert_eq!(tet.volume(), ratio(1, 6));
    }

    #[test]
    fn face_chart_volume_matches_model() {
        let m = crate::skeleton::build_model(
            vec![
                crate::skeleton::Divisor::new(0, 1, int(0)),
                crate::skeleton::Divisor::new(1, 2, int(0)),
                crate::skeleton::Divisor::new(2, 3, int(0)),
            ],
            crate::skeleton::nonempty_subsets(&[0, 1, 2]),
            2,
            false,
        )
        .unwrap();
        let k = m.face_index(&[0, 1, 2]).unwrap();
        let d: Domain<Rational> = Domain::face_chart(&m, k).unwrap();
        assert_eq!(d.volume(), m.chart_volume(k));
    }
}
