use crate::scalar::{Rational, Scalar};
use crate::skeleton::SncModel;

use super::ComparisonError;

/// Identification of the charts of two top faces across their common wall:
/// `x_0' = -x_0`, `x_i' = x_i + d_i x_0` for `i = 1..n-1`.
///
/// `x_0` is the normal coordinate (`x_0 = 0` on the wall) and `x_1..x_{n-1}`
/// are wall coordinates. The map is its own inverse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionMap {
    pub d: Vec<i64>,
}

impl TransitionMap {
    pub fn new(d: Vec<i64>) -> TransitionMap {
        TransitionMap { d }
    }

    /// Checks that `left` and `right` are top faces of `model` meeting in a
    /// codimension-one face.
    pub fn between(model: &SncModel, left: usize, right: usize, d: Vec<i64>) -> Result<TransitionMap, ComparisonError> {
        let n = model.dimension();
        let a = model.face(left).index_set();
        let b = model.face(right).index_set();
        let shared = a.iter().filter(|i| b.contains(i)).count();
        if left == right || a.len() != n + 1 || b.len() != n + 1 || shared != n {
            return Err(ComparisonError::NotAdjacent(left, right));
        }
        Ok(TransitionMap { d })
    }

    /// Chart dimension `n`.
    pub fn dim(&self) -> usize {
        self.d.len() + 1
    }

    pub fn apply<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let mut out = Vec::with_capacity(x.len());
        out.push(-x[0].clone());
        for (i, di) in self.d.iter().enumerate() {
            out.push(x[i + 1].clone() + &(S::from_int(*di) * &x[0]));
        }
        out
    }

    /// The linear part as a matrix (row `k` gives `x_k'`).
    pub fn matrix<S: Scalar>(&self) -> Vec<Vec<S>> {
        let n = self.dim();
        let mut m = vec![vec![S::zero(); n]; n];
        m[0][0] = -S::one();
        for (i, di) in self.d.iter().enumerate() {
            m[i + 1][i + 1] = S::one();
            m[i + 1][0] = S::from_int(*di);
        }
        m
    }
}

/// A quadratic `x^t A x / 2 + b . x + c` with symmetric `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadratic<S> {
    pub a: Vec<Vec<S>>,
    pub b: Vec<S>,
    pub c: S,
}

impl<S: Scalar> Quadratic<S> {
    pub fn value(&self, x: &[S]) -> S {
        let half = S::one() / &S::from_int(2);
        let mut v = self.c.clone();
        for (i, xi) in x.iter().enumerate() {
            v = v + &(self.b[i].clone() * xi);
            for (j, xj) in x.iter().enumerate() {
                v = v + &(half.clone() * &self.a[i][j] * xi * xj);
            }
        }
        v
    }

    pub fn gradient(&self, x: &[S]) -> Vec<S> {
        (0..self.b.len())
            .map(|i| x.iter().enumerate().fold(self.b[i].clone(), |acc, (j, xj)| acc + &(self.a[i][j].clone() * xj)))
            .collect()
    }

    /// `y -> q(M y + s)`.
    pub fn compose_linear(&self, m: &[Vec<S>], s: &[S]) -> Quadratic<S> {
        let n = self.b.len();
        let cols = m.first().map_or(0, |r| r.len());
        // A' = M^t A M, b' = M^t (A s + b), c' = q(s).
        let am: Vec<Vec<S>> = (0..n)
            .map(|i| (0..cols).map(|j| (0..n).fold(S::zero(), |acc, k| acc + &(self.a[i][k].clone() * &m[k][j]))).collect())
            .collect();
        let a = (0..cols)
            .map(|i| (0..cols).map(|j| (0..n).fold(S::zero(), |acc, k| acc + &(m[k][i].clone() * &am[k][j]))).collect())
            .collect();
        let gs = self.gradient(s);
        let b = (0..cols).map(|i| (0..n).fold(S::zero(), |acc, k| acc + &(m[k][i].clone() * &gs[k]))).collect();
        Quadratic { a, b, c: self.value(s) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchingResidual<S> {
    /// Wall point in left coordinates.
    pub point: Vec<S>,
    /// `[r_0, r_1, .., r_{n-1}]`: `r_0` is the normal condition.
    pub residuals: Vec<S>,
}

impl<S: Scalar> MatchingResidual<S> {
    pub fn max_abs(&self) -> S {
        self.residuals.iter().fold(S::zero(), |m, r| if r.abs() > m { r.abs() } else { m })
    }
}

/// Residuals of `du_R/dx_i' = du_L/dx_i` (`i >= 1`) and
/// `du_R/dx_0' = -du_L/dx_0 + sum_i d_i du_L/dx_i` at wall points.
///
/// `left` and `right` return gradients in their own charts; the points are
/// given in left coordinates and must have `x_0 = 0`.
pub fn gradient_matching_residual<S: Scalar>(
    left: impl Fn(&[S]) -> Vec<S>,
    right: impl Fn(&[S]) -> Vec<S>,
    transition: &TransitionMap,
    points: &[Vec<S>],
) -> Result<Vec<MatchingResidual<S>>, ComparisonError> {
    let n = transition.dim();
    let mut out = Vec::with_capacity(points.len());
    for x in points {
        if x.len() != n {
            return Err(ComparisonError::ChartDimension { expected: n, got: x.len() });
        }
        let scale = x.iter().fold(S::one(), |acc, v| acc + &v.abs());
        if x[0].abs() > S::slack(&scale) {
            return Err(ComparisonError::OffWall(x.iter().map(|v| v.as_f64()).collect()));
        }
        let gl = left(x);
        let gr = right(&transition.apply(x));
        let mut residuals = Vec::with_capacity(n);
        let mut normal = gr[0].clone() + &gl[0];
        for (i, di) in transition.d.iter().enumerate() {
            normal = normal - &(S::from_int(*di) * &gl[i + 1]);
        }
        residuals.push(normal);
        for i in 1..n {
            residuals.push(gr[i].clone() - &gl[i]);
        }
        out.push(MatchingResidual { point: x.clone(), residuals });
    }
    Ok(out)
}

/// `sum_{i=1}^{n-1} d_i g_i - g_0 - g_0'`: the `D_J . E_J` pairing on the
/// wall curve, which equals minus the normal residual.
pub fn wall_pairing(d: &[Rational], g: &[Rational], g0_right: &Rational) -> Rational {
    d.iter().zip(&g[1..]).fold(-g[0].clone() - g0_right, |acc, (di, gi)| acc + di * gi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio};

    fn sample_quadratic() -> Quadratic<Rational> {
        Quadratic {
            a: vec![
                vec![int(2), ratio(1, 2), int(0)],
                vec![ratio(1, 2), int(3), int(-1)],
                vec![int(0), int(-1), ratio(5, 2)],
            ],
            b: vec![int(1), ratio(-2, 3), int(4)],
            c: int(7),
        }
    }

    #[test]
    fn transition_is_an_involution() {
        let t = TransitionMap::new(vec![2, -1]);
        let x = vec![ratio(1, 3), int(2), ratio(-5, 4)];
        assert_eq!(t.apply(&t.apply(&x)), x);
    }

    #[test]
    fn global_quadratic_matches_exactly() {
        let t = TransitionMap::new(vec![2, -1]);
        let q = sample_quadratic();
        // The right chart sees q through the inverse transition, i.e. T itself.
        let qr = q.compose_linear(&t.matrix(), &[int(0), int(0), int(0)]);
        let points: Vec<Vec<Rational>> = (0..5).map(|k| vec![int(0), ratio(k, 4), ratio(3 - k, 5)]).collect();
        let r = gradient_matching_residual(|x| q.gradient(x), |y| qr.gradient(y), &t, &points).unwrap();
        assert!(r.iter().all(|m| m.max_abs() == int(0)));
    }

    #[test]
    fn kink_shows_up_in_the_normal_residual() {
        let t = TransitionMap::new(vec![1, 0]);
        let q = sample_quadratic();
        let qr = q.compose_linear(&t.matrix(), &[int(0), int(0), int(0)]);
        let s = ratio(3, 7);
        let right = |y: &[Rational]| {
            let mut g = qr.gradient(y);
            g[0] = g[0].clone() + &s;
            g
        };
        let r = gradient_matching_residual(|x| q.gradient(x), right, &t, &[vec![int(0), int(1), int(1)]]).unwrap();
        assert_eq!(r[0].residuals, vec![s, int(0), int(0)]);
    }

    #[test]
    fn reflection_with_zero_degrees() {
        let t = TransitionMap::new(vec![0]);
        let f = |x: &[f64]| vec![2.0 * x[0] + x[1], x[0] + 3.0 * x[1] * x[1]];
        let right = |y: &[f64]| {
            let g = f(&[-y[0], y[1]]);
            vec![-g[0], g[1]]
        };
        let r = gradient_matching_residual(f, right, &t, &[vec![0.0, 0.3]]).unwrap();
        assert!(r[0].max_abs() < 1e-15);
    }

    #[test]
    fn points_off_the_wall_are_rejected() {
        let t = TransitionMap::new(vec![0]);
        let g = |x: &[f64]| x.to_vec();
        assert!(matches!(
            gradient_matching_residual(g, g, &t, &[vec![0.1, 0.0]]),
            Err(ComparisonError::OffWall(_))
        ));
    }

    #[test]
    fn adjacency_is_checked() {
        let (model, _) = crate::na_potential::rational_curve_chain(&[int(1), int(1)]).unwrap();
        let left = model.face_index(&[0, 1, 2]).unwrap();
        let right = model.face_index(&[1, 2, 3]).unwrap();
        assert!(TransitionMap::between(&model, left, right, vec![1]).is_ok());
        let edge = model.face_index(&[1, 2]).unwrap();
        assert_eq!(TransitionMap::between(&model, left, edge, vec![1]), Err(ComparisonError::NotAdjacent(left, edge)));
    }
}
