use std::collections::BTreeMap;

use crate::scalar::Scalar;

use super::cell::{Label, Polytope};
use super::{Domain, RealMaError};

/// Nodes with values on a polytope; the function is the lower convex
/// envelope of the lifted nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPL<S> {
    domain: Domain<S>,
    nodes: Vec<Vec<S>>,
    values: Vec<S>,
    boundary: Vec<bool>,
}

/// Subgradient cell of every node together with its Monge–Ampère mass.
#[derive(Debug, Clone, PartialEq)]
pub struct SubgradientMeasure<S> {
    /// Cell volume for interior nodes, zero on the boundary.
    pub masses: Vec<S>,
    pub boundary: Vec<bool>,
    /// Interior nodes whose cell is empty, i.e. whose value lies strictly
    /// above the envelope.
    pub above_envelope: Vec<usize>,
    /// Every interior mass vanishes.
    pub degenerate: bool,
}

impl<S: Scalar> SubgradientMeasure<S> {
    pub fn total(&self) -> S {
        self.masses.iter().fold(S::zero(), |acc, m| acc + m)
    }
}

impl<S: Scalar> ConvexPL<S> {
    pub fn new(domain: Domain<S>, nodes: Vec<Vec<S>>, values: Vec<S>) -> Result<ConvexPL<S>, RealMaError> {
        if nodes.len() != values.len() {
            return Err(RealMaError::DimensionMismatch);
        }
        let dim = domain.dimension();
        if nodes.iter().any(|x| x.len() != dim) {
            return Err(RealMaError::DimensionMismatch);
        }
        if !S::EXACT && values.iter().chain(nodes.iter().flatten()).any(|v| !v.as_f64().is_finite()) {
            return Err(RealMaError::NonFinite);
        }
        for (k, x) in nodes.iter().enumerate() {
            if !domain.contains(x) {
                return Err(RealMaError::NodeOutsideDomain(k));
            }
            for y in &nodes[..k] {
                if x == y {
                    return Err(RealMaError::DuplicateNode(k));
                }
            }
        }
        for (k, v) in domain.vertices().iter().enumerate() {
            if !nodes.iter().any(|x| x == v) {
                return Err(RealMaError::MissingDomainVertex(k));
            }
        }
        let boundary = nodes.iter().map(|x| domain.on_boundary(x)).collect();
        Ok(ConvexPL { domain, nodes, values, boundary })
    }

    pub fn domain(&self) -> &Domain<S> {
        &self.domain
    }

    pub fn nodes(&self) -> &[Vec<S>] {
        &self.nodes
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.boundary[k]
    }

    pub fn interior(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.nodes.len()).filter(|&k| !self.boundary[k])
    }

    pub fn with_values(&self, values: Vec<S>) -> ConvexPL<S> {
        assert_eq!(values.len(), self.nodes.len());
        ConvexPL { values, ..self.clone() }
    }

    /// Sup-norm radius of a box in gradient space containing every interior
    /// cell: a supporting slope `p` at an interior node `x` satisfies
    /// `|p|_1 t <= osc` for `t` the inner radius at `x`.
    pub fn gradient_bound(&self) -> S {
        let (lo, hi) = self.values.iter().fold((self.values[0].clone(), self.values[0].clone()), |(lo, hi), v| {
            (if *v < lo { v.clone() } else { lo }, if *v > hi { v.clone() } else { hi })
        });
        let osc = hi - &lo;
        let mut best = S::zero();
        for k in self.interior() {
            let r = osc.clone() / &self.domain.inner_radius(&self.nodes[k]);
            if r > best {
                best = r;
            }
        }
        best + &S::one()
    }

    /// `{p : p . (x_j - x_k) <= v_j - v_k for all j}` intersected with the
    /// box `[-radius, radius]^n`.
    pub fn cell(&self, k: usize, radius: &S) -> Polytope<S> {
        let n = self.domain.dimension();
        let lo = vec![-radius.clone(); n];
        let hi = vec![radius.clone(); n];
        let mut cell = Polytope::cube(&lo, &hi);
        let xk = &self.nodes[k];
        for (j, xj) in self.nodes.iter().enumerate() {
            if j == k {
                continue;
            }
            let a: Vec<S> = xj.iter().zip(xk).map(|(u, v)| u.clone() - v).collect();
            let b = self.values[j].clone() - &self.values[k];
            cell.clip(&a, &b, Label::Node(j));
            if cell.is_empty() {
                break;
            }
        }
        cell
    }

    /// Cells of the interior nodes; `None` on the boundary.
    pub fn interior_cells(&self) -> Vec<Option<Polytope<S>>> {
        let radius = self.gradient_bound();
        (0..self.nodes.len())
            .map(|k| if self.boundary[k] { None } else { Some(self.cell(k, &radius)) })
            .collect()
    }

    /// Whether node `k` lies on the lower envelope, i.e. has a nonempty cell.
    /// Boundary cells are unbounded; they are searched in a box scaled by the
    /// oscillation over the smallest node separation.
    pub fn on_envelope(&self, k: usize) -> bool {
        if !self.boundary[k] {
            return !self.cell(k, &self.gradient_bound()).is_empty();
        }
        let sup = |a: &[S], b: &[S]| {
            a.iter().zip(b).fold(S::zero(), |m, (x, y)| {
                let d = (x.clone() - y).abs();
                if d > m {
                    d
                } else {
                    m
                }
            })
        };
        let mut sep: Option<S> = None;
        let mut diam = S::zero();
        for i in 0..self.nodes.len() {
            for j in 0..i {
                let d = sup(&self.nodes[i], &self.nodes[j]);
                if d > diam {
                    diam = d.clone();
                }
                sep = Some(match sep {
                    Some(s) if s <= d => s,
                    _ => d,
                });
            }
        }
        let Some(sep) = sep else { return true };
        let (lo, hi) = self.values.iter().fold((self.values[0].clone(), self.values[0].clone()), |(lo, hi), v| {
            (if *v < lo { v.clone() } else { lo }, if *v > hi { v.clone() } else { hi })
        });
        let one = S::one();
        let radius = S::from_int(10) * &(one.clone() + &((hi - &lo) / &sep)) * &(one + &(diam / &sep));
        !self.cell(k, &radius).is_empty()
    }
}

pub fn ma_measure<S: Scalar>(pl: &ConvexPL<S>) -> SubgradientMeasure<S> {
    let cells = pl.interior_cells();
    let mut masses = Vec::with_capacity(cells.len());
    let mut above_envelope = Vec::new();
    for (k, cell) in cells.iter().enumerate() {
        match cell {
            None => masses.push(S::zero()),
            Some(c) => {
                if c.is_empty() {
                    above_envelope.push(k);
                }
                masses.push(c.volume());
            }
        }
    }
    let degenerate = masses.iter().all(|m| m.is_zero());
    SubgradientMeasure { masses, boundary: pl.boundary.clone(), above_envelope, degenerate }
}

/// Rasterized subgradient measure: every pixel `p` of gradient space goes to
/// the node maximizing `p . x_j - v_j`, and interior nodes collect the area of
/// their pixels. A coarse pass locates the gradient image of the interior
/// nodes; the fine pass uses `resolution` pixels per axis over that box.
/// One- and two-dimensional domains; other dimensions return `None`.
pub fn ma_measure_oracle(pl: &ConvexPL<f64>, resolution: usize) -> Option<Vec<f64>> {
    match pl.domain.dimension() {
        1 => Some(oracle_1d(pl, resolution)),
        2 => Some(oracle_2d(pl, resolution)),
        _ => None,
    }
}

fn oracle_1d(pl: &ConvexPL<f64>, resolution: usize) -> Vec<f64> {
    let r = pl.gradient_bound();
    let owner = |p: f64| argmax(pl.nodes.iter().zip(&pl.values).map(|(x, v)| p * x[0] - v));
    let (lo, hi) = image_box(&[(-r, r)], resolution.min(4096), |p| !pl.boundary[owner(p[0])]);
    let mut masses = vec![0.0; pl.nodes.len()];
    let Some((lo, hi)) = lo.zip(hi) else { return masses };
    let h = (hi[0] - lo[0]) / resolution as f64;
    for i in 0..resolution {
        let k = owner(lo[0] + (i as f64 + 0.5) * h);
        if !pl.boundary[k] {
            masses[k] += h;
        }
    }
    masses
}

fn oracle_2d(pl: &ConvexPL<f64>, resolution: usize) -> Vec<f64> {
    let r = pl.gradient_bound();
    let mut masses = vec![0.0; pl.nodes.len()];
    let coarse = resolution.clamp(16, 512);
    let (lo, hi) = {
        let mut lo: Option<Vec<f64>> = None;
        let mut hi: Option<Vec<f64>> = None;
        let h = 2.0 * r / coarse as f64;
        for i in 0..coarse {
            let py = -r + (i as f64 + 0.5) * h;
            row_owners(pl, py, -r, h, coarse, |col, k| {
                if !pl.boundary[k] {
                    let px = -r + (col as f64 + 0.5) * h;
                    let l = lo.get_or_insert_with(|| vec![px, py]);
                    l[0] = l[0].min(px);
                    l[1] = l[1].min(py);
                    let u = hi.get_or_insert_with(|| vec![px, py]);
                    u[0] = u[0].max(px);
                    u[1] = u[1].max(py);
                }
            });
        }
        match (lo, hi) {
            (Some(l), Some(u)) => (vec![l[0] - h, l[1] - h], vec![u[0] + h, u[1] + h]),
            _ => return masses,
        }
    };
    let (mut lo, mut hi) = (lo, hi);
    loop {
        masses.iter_mut().for_each(|m| *m = 0.0);
        let hx = (hi[0] - lo[0]) / resolution as f64;
        let hy = (hi[1] - lo[1]) / resolution as f64;
        let area = hx * hy;
        // Sides of the box crossed by an interior cell: [x-, x+, y-, y+].
        let mut touched = [false; 4];
        for i in 0..resolution {
            let py = lo[1] + (i as f64 + 0.5) * hy;
            row_owners(pl, py, lo[0], hx, resolution, |col, k| {
                if !pl.boundary[k] {
                    masses[k] += area;
                    touched[0] |= col == 0;
                    touched[1] |= col + 1 == resolution;
                    touched[2] |= i == 0;
                    touched[3] |= i + 1 == resolution;
                }
            });
        }
        // Thin tips of cells can slip between coarse pixels; grow the box
        // until no cell reaches its sides.
        let mut grown = false;
        for axis in 0..2 {
            let width = hi[axis] - lo[axis];
            if touched[2 * axis] && lo[axis] > -r {
                lo[axis] = (lo[axis] - 0.25 * width).max(-r);
                grown = true;
            }
            if touched[2 * axis + 1] && hi[axis] < r {
                hi[axis] = (hi[axis] + 0.25 * width).min(r);
                grown = true;
            }
        }
        if !grown {
            return masses;
        }
    }
}

fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (k, v) in values.enumerate() {
        if v > best.1 {
            best = (k, v);
        }
    }
    best.0
}

fn image_box(
    ranges: &[(f64, f64)],
    samples: usize,
    hit: impl Fn(&[f64]) -> bool,
) -> (Option<Vec<f64>>, Option<Vec<f64>>) {
    let (a, b) = ranges[0];
    let h = (b - a) / samples as f64;
    let mut lo = None;
    let mut hi = None;
    for i in 0..samples {
        let p = a + (i as f64 + 0.5) * h;
        if hit(&[p]) {
            lo.get_or_insert(p - h);
            hi = Some(p + h);
        }
    }
    (lo.map(|v| vec![v]), hi.map(|v| vec![v]))
}

/// Owner of each pixel in a row `py` of gradient space. Along the row the
/// objective `p_x x_j + (p_y y_j - v_j)` is a family of lines in `p_x`, so
/// the owners are read off their upper envelope.
fn row_owners(pl: &ConvexPL<f64>, py: f64, x0: f64, h: f64, count: usize, mut visit: impl FnMut(usize, usize)) {
    let mut lines: Vec<(f64, f64, usize)> =
        pl.nodes.iter().zip(&pl.values).enumerate().map(|(k, (x, v))| (x[0], py * x[1] - v, k)).collect();
    lines.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)).then(a.2.cmp(&b.2)));
    lines.dedup_by(|b, a| a.0 == b.0);
    let mut hull: Vec<(f64, f64, usize)> = Vec::with_capacity(lines.len());
    for l in lines {
        while hull.len() >= 2 {
            let (s1, c1, _) = hull[hull.len() - 2];
            let (s2, c2, _) = hull[hull.len() - 1];
            // The middle line is redundant if the outer two cross below it.
            if (c1 - l.1) * (s2 - s1) <= (c1 - c2) * (l.0 - s1) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(l);
    }
    let mut at = 0;
    for col in 0..count {
        let px = x0 + (col as f64 + 0.5) * h;
        while at + 1 < hull.len() && hull[at + 1].0 * px + hull[at + 1].1 >= hull[at].0 * px + hull[at].1 {
            at += 1;
        }
        visit(col, hull[at].2);
    }
}

/// Interior nodes split by whether their subgradient cell has positive
/// volume; singular nodes are grouped by whether their cells touch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvexityPartition {
    pub strictly_convex: Vec<usize>,
    pub singular: Vec<usize>,
    pub components: Vec<Vec<usize>>,
}

pub fn strict_convexity_report<S: Scalar>(pl: &ConvexPL<S>) -> ConvexityPartition {
    let cells = pl.interior_cells();
    let mut strict = Vec::new();
    let mut singular = Vec::new();
    for (k, c) in cells.iter().enumerate() {
        if let Some(c) = c {
            let vol = c.volume();
            let scale = pl.gradient_bound();
            let tiny = S::slack(&crate::scalar::pow(&scale, pl.domain.dimension()));
            if vol > tiny {
                strict.push(k);
            } else {
                singular.push(k);
            }
        }
    }
    let mut parent: BTreeMap<usize, usize> = singular.iter().map(|&k| (k, k)).collect();
    fn find(parent: &mut BTreeMap<usize, usize>, k: usize) -> usize {
        let p = parent[&k];
        if p == k {
            return k;
        }
        let root = find(parent, p);
        parent.insert(k, root);
        root
    }
    for (a, &k) in singular.iter().enumerate() {
        let Some(cell) = &cells[k] else { continue };
        for &j in &singular[a + 1..] {
            let d: Vec<S> = pl.nodes[j].iter().zip(&pl.nodes[k]).map(|(u, v)| u.clone() - v).collect();
            let b = pl.values[j].clone() - &pl.values[k];
            let touches = cell.max_violation(&d, &b).is_some_and(|v| {
                let scale = b.abs() + &d.iter().fold(S::zero(), |acc, x| acc + &x.abs());
                v >= -S::slack(&(scale * &pl.gradient_bound()))
            });
            if touches {
                let (ra, rb) = (find(&mut parent, k), find(&mut parent, j));
                if ra != rb {
                    parent.insert(ra.max(rb), ra.min(rb));
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &k in &singular {
        let r = find(&mut parent, k);
        groups.entry(r).or_default().push(k);
    }
    ConvexityPartition { strictly_convex: strict, singular, components: groups.into_values().collect() }
}

/// Slope jumps `(v_{k+1} - v_k)/(x_{k+1} - x_k) - (v_k - v_{k-1})/(x_k - x_{k-1})`
/// of a piecewise-linear function on sorted nodes, one per interior node.
pub fn slope_jumps_1d<S: Scalar>(x: &[S], v: &[S]) -> Vec<S> {
    assert_eq!(x.len(), v.len());
    let slopes: Vec<S> =
        (1..x.len()).map(|k| (v[k].clone() - &v[k - 1]) / &(x[k].clone() - &x[k - 1])).collect();
    slopes.windows(2).map(|w| w[1].clone() - &w[0]).collect()
}
