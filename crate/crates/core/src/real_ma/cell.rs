//! Bounded convex polytopes in dimension 1, 2 or 3, cut down by halfspaces.
//!
//! Each boundary piece remembers which constraint produced it, so that the
//! measure of the facet shared with a neighbouring cell can be read back.

use std::cmp::Ordering;

use crate::scalar::Scalar;

/// Origin of a facet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    /// Initial bounding box.
    Box,
    /// The `i`-th facet of a domain.
    Domain(usize),
    /// Constraint coming from node `j`.
    Node(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face3<S> {
    pub label: Label,
    /// Vertices in cyclic order.
    pub vertices: Vec<Vec<S>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Polytope<S> {
    Empty,
    Interval { lo: S, hi: S, lo_label: Label, hi_label: Label },
    /// `labels[i]` belongs to the edge from `vertices[i]` to `vertices[i + 1]`.
    Polygon { vertices: Vec<Vec<S>>, labels: Vec<Label> },
    Polyhedron { faces: Vec<Face3<S>> },
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).fold(S::zero(), |acc, (x, y)| acc + &(x.clone() * y))
}

fn lerp<S: Scalar>(p: &[S], q: &[S], t: &S) -> Vec<S> {
    p.iter().zip(q).map(|(a, b)| a.clone() + &(t.clone() * &(b.clone() - a))).collect()
}

fn close<S: Scalar>(p: &[S], q: &[S]) -> bool {
    p.iter().zip(q).all(|(a, b)| {
        let scale = a.abs().max_ref(&b.abs());
        (a.clone() - b).abs() <= S::slack(&scale)
    })
}

trait MaxRef: Sized {
    fn max_ref(self, other: &Self) -> Self;
}

impl<S: Scalar> MaxRef for S {
    fn max_ref(self, other: &Self) -> Self {
        if *other > self {
            other.clone()
        } else {
            self
        }
    }
}

fn cross3<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    vec![
        a[1].clone() * &b[2] - &(a[2].clone() * &b[1]),
        a[2].clone() * &b[0] - &(a[0].clone() * &b[2]),
        a[0].clone() * &b[1] - &(a[1].clone() * &b[0]),
    ]
}

fn sub<S: Scalar>(a: &[S], b: &[S]) -> Vec<S> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y).collect()
}

/// Clips a cyclic polygon (2D or planar in 3D) to `a . p <= b`.
/// The new edge along the cutting line is labelled `cut`.
fn clip_ring<S: Scalar>(
    vertices: &[Vec<S>],
    labels: &[Label],
    a: &[S],
    b: &S,
    cut: Label,
) -> (Vec<Vec<S>>, Vec<Label>) {
    let m = vertices.len();
    let f: Vec<S> = vertices.iter().map(|v| dot(a, v) - b).collect();
    let scale = b.abs() + &a.iter().fold(S::zero(), |acc, x| acc + &x.abs());
    let tol = S::slack(&scale);
    let inside: Vec<bool> = f.iter().map(|v| *v <= tol).collect();
    if inside.iter().all(|&i| i) {
        return (vertices.to_vec(), labels.to_vec());
    }
    let mut out: Vec<Vec<S>> = Vec::new();
    let mut out_labels: Vec<Label> = Vec::new();
    let push = |p: Vec<S>, l: Label, out: &mut Vec<Vec<S>>, out_labels: &mut Vec<Label>| {
        if let Some(last) = out.last() {
            if close(last, &p) {
                *out_labels.last_mut().unwrap() = l;
                return;
            }
        }
        out.push(p);
        out_labels.push(l);
    };
    for i in 0..m {
        let j = (i + 1) % m;
        let (p, q) = (&vertices[i], &vertices[j]);
        if inside[i] {
            push(p.clone(), labels[i], &mut out, &mut out_labels);
        }
        if inside[i] != inside[j] {
            let t = f[i].clone() / &(f[i].clone() - &f[j]);
            let x = lerp(p, q, &t);
            if inside[i] {
                push(x, cut, &mut out, &mut out_labels);
            } else {
                push(x, labels[i], &mut out, &mut out_labels);
            }
        }
    }
    while out.len() > 1 && close(&out[0], out.last().unwrap()) {
        out.pop();
        out_labels.pop();
    }
    (out, out_labels)
}

impl<S: Scalar> Polytope<S> {
    /// Axis-aligned box `[lo, hi]` with every facet labelled `Box`.
    pub fn cube(lo: &[S], hi: &[S]) -> Polytope<S> {
        match lo.len() {
            1 => Polytope::Interval { lo: lo[0].clone(), hi: hi[0].clone(), lo_label: Label::Box, hi_label: Label::Box },
            2 => {
                let v = |x: &S, y: &S| vec![x.clone(), y.clone()];
                Polytope::Polygon {
                    vertices: vec![v(&lo[0], &lo[1]), v(&hi[0], &lo[1]), v(&hi[0], &hi[1]), v(&lo[0], &hi[1])],
                    labels: vec![Label::Box; 4],
                }
            }
            3 => {
                let corner = |bits: [bool; 3]| -> Vec<S> {
                    (0..3).map(|k| if bits[k] { hi[k].clone() } else { lo[k].clone() }).collect()
                };
                let mut faces = Vec::new();
                for axis in 0..3 {
                    let (u, w) = ((axis + 1) % 3, (axis + 2) % 3);
                    for side in [false, true] {
                        let mut ring = Vec::new();
                        for (a, b) in [(false, false), (true, false), (true, true), (false, true)] {
                            let mut bits = [false; 3];
                            bits[axis] = side;
                            bits[u] = a;
                            bits[w] = b;
                            ring.push(corner(bits));
                        }
                        faces.push(Face3 { label: Label::Box, vertices: ring });
                    }
                }
                Polytope::Polyhedron { faces }
            }
            d => panic!("polytopes of dimension {d} are not supported"),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Polytope::Empty => true,
            Polytope::Interval { lo, hi, .. } => hi < lo,
            Polytope::Polygon { vertices, .. } => vertices.is_empty(),
            Polytope::Polyhedron { faces } => faces.is_empty(),
        }
    }

    /// Intersects with `a . p <= b`.
    pub fn clip(&mut self, a: &[S], b: &S, label: Label) {
        match self {
            Polytope::Empty => {}
            Polytope::Interval { lo, hi, lo_label, hi_label } => {
                let a0 = &a[0];
                let tol = S::slack(&(b.abs() + &a0.abs()));
                if a0.abs() <= tol {
                    if *b < -tol {
                        *self = Polytope::Empty;
                    }
                    return;
                }
                let t = b.clone() / a0;
                if *a0 > S::zero() {
                    if t < *hi {
                        *hi = t;
                        *hi_label = label;
                    }
                } else if t > *lo {
                    *lo = t;
                    *lo_label = label;
                }
                if *hi < *lo {
                    let gap = lo.clone() - &*hi;
                    if gap <= S::slack(&hi.abs().max_ref(&lo.abs())) {
                        *hi = lo.clone();
                    } else {
                        *self = Polytope::Empty;
                    }
                }
            }
            Polytope::Polygon { vertices, labels } => {
                let (v, l) = clip_ring(vertices, labels, a, b, label);
                if v.is_empty() {
                    *self = Polytope::Empty;
                } else {
                    *vertices = v;
                    *labels = l;
                }
            }
            Polytope::Polyhedron { faces } => {
                let scale = b.abs() + &a.iter().fold(S::zero(), |acc, x| acc + &x.abs());
                let tol = S::slack(&scale);
                let mut on_plane: Vec<Vec<S>> = Vec::new();
                let mut changed = false;
                let mut kept = Vec::with_capacity(faces.len() + 1);
                for face in faces.iter() {
                    let labels = vec![face.label; face.vertices.len()];
                    let (v, _) = clip_ring(&face.vertices, &labels, a, b, label);
                    if v.len() != face.vertices.len() || v.iter().zip(&face.vertices).any(|(x, y)| !close(x, y)) {
                        changed = true;
                    }
                    for p in &v {
                        let f = dot(a, p) - b;
                        if f.abs() <= tol && !on_plane.iter().any(|q| close(q, p)) {
                            on_plane.push(p.clone());
                        }
                    }
                    if v.len() >= 3 {
                        kept.push(Face3 { label: face.label, vertices: v });
                    }
                }
                if !changed {
                    return;
                }
                if on_plane.len() >= 3 {
                    let ring = order_planar(on_plane, a);
                    kept.push(Face3 { label, vertices: ring });
                }
                if kept.len() < 4 {
                    // Degenerate remains (points, segments, flat polygons)
                    // carry no volume; keep whatever faces survived so that
                    // adjacency queries still see them.
                    if kept.is_empty() {
                        *self = Polytope::Empty;
                        return;
                    }
                }
                *faces = kept;
            }
        }
    }

    /// Lebesgue measure (length, area or volume).
    pub fn volume(&self) -> S {
        match self {
            Polytope::Empty => S::zero(),
            Polytope::Interval { lo, hi, .. } => {
                if hi > lo {
                    hi.clone() - lo
                } else {
                    S::zero()
                }
            }
            Polytope::Polygon { vertices, .. } => {
                let m = vertices.len();
                if m < 3 {
                    return S::zero();
                }
                let mut twice = S::zero();
                for i in 0..m {
                    let (p, q) = (&vertices[i], &vertices[(i + 1) % m]);
                    twice = twice + &(p[0].clone() * &q[1]) - &(p[1].clone() * &q[0]);
                }
                twice.abs() / &S::from_int(2)
            }
            Polytope::Polyhedron { faces } => {
                if faces.len() < 4 {
                    return S::zero();
                }
                let all: Vec<&Vec<S>> = faces.iter().flat_map(|f| f.vertices.iter()).collect();
                let count = S::from_int(all.len() as i64);
                let c: Vec<S> = (0..3)
                    .map(|k| all.iter().fold(S::zero(), |acc, v| acc + &v[k]) / &count)
                    .collect();
                let mut six = S::zero();
                for f in faces {
                    let r = &f.vertices;
                    let p0 = sub(&r[0], &c);
                    for i in 1..r.len().saturating_sub(1) {
                        let det = dot(&p0, &cross3(&sub(&r[i], &c), &sub(&r[i + 1], &c)));
                        six = six + &det.abs();
                    }
                }
                six / &S::from_int(6)
            }
        }
    }

    /// Every vertex (endpoints for intervals).
    pub fn vertices(&self) -> Vec<Vec<S>> {
        match self {
            Polytope::Empty => Vec::new(),
            Polytope::Interval { lo, hi, .. } => vec![vec![lo.clone()], vec![hi.clone()]],
            Polytope::Polygon { vertices, .. } => vertices.clone(),
            Polytope::Polyhedron { faces } => {
                let mut out: Vec<Vec<S>> = Vec::new();
                for f in faces {
                    for v in &f.vertices {
                        if !out.iter().any(|q| close(q, v)) {
                            out.push(v.clone());
                        }
                    }
                }
                out
            }
        }
    }

    /// `(n-1)`-dimensional measure of the facets carrying `label`, in `f64`.
    pub fn facet_measure(&self, label: Label) -> f64 {
        match self {
            Polytope::Empty => 0.0,
            Polytope::Interval { lo, hi, lo_label, hi_label } => {
                if hi < lo {
                    return 0.0;
                }
                if *lo_label == label || *hi_label == label {
                    1.0
                } else {
                    0.0
                }
            }
            Polytope::Polygon { vertices, labels } => {
                let m = vertices.len();
                let mut total = 0.0;
                if m < 2 {
                    return 0.0;
                }
                for i in 0..m {
                    if labels[i] == label {
                        let (p, q) = (&vertices[i], &vertices[(i + 1) % m]);
                        let dx = q[0].as_f64() - p[0].as_f64();
                        let dy = q[1].as_f64() - p[1].as_f64();
                        total += dx.hypot(dy);
                    }
                }
                total
            }
            Polytope::Polyhedron { faces } => faces
                .iter()
                .filter(|f| f.label == label)
                .map(|f| {
                    let r: Vec<[f64; 3]> =
                        f.vertices.iter().map(|v| [v[0].as_f64(), v[1].as_f64(), v[2].as_f64()]).collect();
                    let mut area = [0.0f64; 3];
                    for i in 1..r.len().saturating_sub(1) {
                        let u = [r[i][0] - r[0][0], r[i][1] - r[0][1], r[i][2] - r[0][2]];
                        let w = [r[i + 1][0] - r[0][0], r[i + 1][1] - r[0][1], r[i + 1][2] - r[0][2]];
                        area[0] += u[1] * w[2] - u[2] * w[1];
                        area[1] += u[2] * w[0] - u[0] * w[2];
                        area[2] += u[0] * w[1] - u[1] * w[0];
                    }
                    0.5 * (area[0] * area[0] + area[1] * area[1] + area[2] * area[2]).sqrt()
                })
                .sum(),
        }
    }

    /// Maximum of `a . p - b` over the polytope, `None` when empty.
    pub fn max_violation(&self, a: &[S], b: &S) -> Option<S> {
        self.vertices().iter().map(|v| dot(a, v) - b).reduce(|x, y| if y > x { y } else { x })
    }

    pub fn labels(&self) -> Vec<Label> {
        match self {
            Polytope::Empty => Vec::new(),
            Polytope::Interval { lo_label, hi_label, .. } => vec![*lo_label, *hi_label],
            Polytope::Polygon { labels, .. } => labels.clone(),
            Polytope::Polyhedron { faces } => faces.iter().map(|f| f.label).collect(),
        }
    }
}

/// Orders coplanar points cyclically around their centroid, viewed along
/// `normal`. Exact for rational input.
fn order_planar<S: Scalar>(points: Vec<Vec<S>>, normal: &[S]) -> Vec<Vec<S>> {
    let count = S::from_int(points.len() as i64);
    let c: Vec<S> = (0..3).map(|k| points.iter().fold(S::zero(), |acc, v| acc + &v[k]) / &count).collect();
    let u = sub(&points[0], &c);
    let w = cross3(normal, &u);
    let coords: Vec<(S, S)> = points
        .iter()
        .map(|p| {
            let d = sub(p, &c);
            (dot(&d, &u), dot(&d, &w))
        })
        .collect();
    let upper = |(x, y): &(S, S)| *y > S::zero() || (y.is_zero() && *x > S::zero());
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&i, &j| {
        let (a, b) = (&coords[i], &coords[j]);
        match (upper(a), upper(b)) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => {
                let cr = a.0.clone() * &b.1 - &(a.1.clone() * &b.0);
                if cr > S::zero() {
                    Ordering::Less
                } else if cr < S::zero() {
                    Ordering::Greater
                } else {
                    Ordering::Equal
                }
            }
        }
    });
    idx.into_iter().map(|i| points[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, ratio, Rational};

    #[test]
    fn interval_clipping() {
        let mut p: Polytope<Rational> = Polytope::cube(&[int(-5)], &[int(5)]);
        p.clip(&[int(2)], &int(1), Label::Node(1));
        p.clip(&[int(-1)], &int(3), Label::Node(0));
        assert_eq!(p.volume(), ratio(1, 2) + int(3));
        assert_eq!(p.facet_measure(Label::Node(1)), 1.0);
        p.clip(&[int(1)], &int(-4), Label::Node(2));
        assert!(p.is_empty());
    }

    #[test]
    fn polygon_triangle_area() {
        let mut p: Polytope<Rational> = Polytope::cube(&[int(-4), int(-4)], &[int(4), int(4)]);
        p.clip(&[int(-1), int(0)], &int(0), Label::Node(0));
        p.clip(&[int(0), int(-1)], &int(0), Label::Node(1));
        p.clip(&[int(1), int(1)], &int(1), Label::Node(2));
        assert_eq!(p.volume(), ratio(1, 2));
        assert!((p.facet_measure(Label::Node(2)) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.facet_measure(Label::Box), 0.0);
    }

    #[test]
    fn polyhedron_corner_simplex() {
        let mut p: Polytope<Rational> = Polytope::cube(&vec![int(-3); 3], &vec![int(3); 3]);
        for k in 0..3 {
            let mut a = vec![int(0); 3];
            a[k] = int(-1);
            p.clip(&a, &int(0), Label::Node(k));
        }
        assert_eq!(p.volume(), int(27));
        p.clip(&[int(1), int(1), int(1)], &int(1), Label::Node(3));
        assert_eq!(p.volume(), ratio(1, 6));
        assert!((p.facet_measure(Label::Node(3)) - 3f64.sqrt() / 2.0).abs() < 1e-14);
        assert!((p.facet_measure(Label::Node(0)) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn float_and_exact_agree() {
        let mut e: Polytope<Rational> = Polytope::cube(&[int(-2), int(-2)], &[int(2), int(2)]);
        let mut f: Polytope<f64> = Polytope::cube(&[-2.0, -2.0], &[2.0, 2.0]);
        let cuts = [([1, 2], 1), ([-3, 1], 2), ([1, -1], 1), ([0, -1], 1)];
        for (k, (a, b)) in cuts.iter().enumerate() {
            e.clip(&[int(a[0]), int(a[1])], &int(*b), Label::Node(k));
            f.clip(&[a[0] as f64, a[1] as f64], &(*b as f64), Label::Node(k));
        }
        assert!((e.volume().as_f64() - f.volume()).abs() < 1e-14);
    }
}
