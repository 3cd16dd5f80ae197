//! Combinatorial snc degenerations: divisors, the dual intersection complex
//! with its integral affine charts, the essential skeleton, monomial
//! valuations and the limiting Lebesgue measure.
//!
//! A face with index set `J = {j_0 < j_1 < ... < j_p}` carries the chart
//! `{x : sum_{i in J} b_i x_i = 1, 0 <= x_i <= 1}`. Points are stored with one
//! coordinate per element of `J`, in the same order. When a reduced chart is
//! needed the first coordinate `x_{j_0}` is eliminated and densities are
//! measured against `dx_{j_1} ... dx_{j_p}`.
//!
//! The model is fixed once and for all. Retraction maps of different models
//! sharing the same complex can differ; nothing here compares models.

use std::collections::{BTreeSet, HashMap};

use num_traits::{One, Zero};

use crate::scalar::{factorial, int, Rational, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("face {face:?} is declared but its subface {missing:?} is not")]
    MissingSubface { face: Vec<usize>, missing: Vec<usize> },
    #[error("divisor {id} has multiplicity {b}; multiplicities must be >= 1")]
    BadMultiplicity { id: usize, b: u32 },
    #[error("model is flagged semistable but divisor {id} has multiplicity {b}")]
    NotSemistable { id: usize, b: u32 },
    #[error("divisor {id} has negative weight")]
    NegativeWeight { id: usize },
    #[error("weights must be normalized so that min a_i = 0")]
    WeightsNotNormalized,
    #[error("divisor ids must be exactly 0..{count}; found {found:?}")]
    BadDivisorIds { count: usize, found: Vec<usize> },
    #[error("face {0:?} references an unknown divisor")]
    UnknownDivisor(Vec<usize>),
    #[error("face {0:?} is declared twice")]
    DuplicateFace(Vec<usize>),
    #[error("empty face index set")]
    EmptyFace,
    #[error("face {face:?} has dimension {dim} > relative dimension {n}")]
    FaceTooLarge { face: Vec<usize>, dim: usize, n: usize },
    #[error("divisor {0} has no vertex face")]
    MissingVertex(usize),
    #[error("no divisors")]
    NoDivisors,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChartError {
    #[error("point has {got} coordinates, face has {expected} vertices")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("chart constraint sum b_i x_i = 1 violated")]
    OffChart,
    #[error("coordinate outside [0, 1]")]
    OutOfRange,
    #[error("monomial support is empty")]
    EmptySupport,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MeasureError {
    #[error("essential skeleton has dimension {dim:?} < n = {n}; use residue-weighted data")]
    NotMaximal { dim: Option<usize>, n: usize },
    #[error("Lebesgue limit measure requires a semistable model")]
    NotSemistable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Divisor {
    pub id: usize,
    /// Multiplicity `b_i` of `E_i` in the central fibre.
    pub multiplicity: u32,
    /// Log-discrepancy `a_i`.
    pub weight: Rational,
    /// Optional per-divisor data (for example `deg L|_{E_i}` on curves).
    pub degrees: Option<Vec<Rational>>,
}

impl Divisor {
    pub fn new(id: usize, multiplicity: u32, weight: Rational) -> Self {
        Divisor { id, multiplicity, weight, degrees: None }
    }

    pub fn reduced(id: usize) -> Self {
        Self::new(id, 1, Rational::zero())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Face {
    index_set: Vec<usize>,
}

impl Face {
    pub fn index_set(&self) -> &[usize] {
        &self.index_set
    }

    pub fn dim(&self) -> usize {
        self.index_set.len() - 1
    }

    pub fn contains(&self, i: usize) -> bool {
        self.index_set.binary_search(&i).is_ok()
    }

    /// Position of divisor `i` within the face's coordinate vector.
    pub fn position(&self, i: usize) -> Option<usize> {
        self.index_set.binary_search(&i).ok()
    }
}

/// A validated snc model: divisors with multiplicities and weights plus the
/// explicitly listed faces of the dual intersection complex.
#[derive(Debug, Clone)]
pub struct SncModel {
    divisors: Vec<Divisor>,
    faces: Vec<Face>,
    semistable: bool,
    dimension: usize,
    lookup: HashMap<Vec<usize>, usize>,
}

/// Validates the combinatorial data of a degeneration.
///
/// Face index sets may be given in any order; they are sorted. The face list
/// is stored sorted by dimension, then lexicographically.
pub fn build_model(
    divisors: Vec<Divisor>,
    face_index_sets: Vec<Vec<usize>>,
    n: usize,
    semistable: bool,
) -> Result<SncModel, ModelError> {
    if divisors.is_empty() {
        return Err(ModelError::NoDivisors);
    }
    let mut divisors = divisors;
    divisors.sort_by_key(|d| d.id);
    let ids: Vec<usize> = divisors.iter().map(|d| d.id).collect();
    if ids.iter().enumerate().any(|(k, &id)| k != id) {
        return Err(ModelError::BadDivisorIds { count: divisors.len(), found: ids });
    }
    for d in &divisors {
        if d.multiplicity < 1 {
            return Err(ModelError::BadMultiplicity { id: d.id, b: d.multiplicity });
        }
        if semistable && d.multiplicity != 1 {
            return Err(ModelError::NotSemistable { id: d.id, b: d.multiplicity });
        }
        if d.weight < Rational::zero() {
            return Err(ModelError::NegativeWeight { id: d.id });
        }
    }
    if !divisors.iter().any(|d| d.weight.is_zero()) {
        return Err(ModelError::WeightsNotNormalized);
    }

    let mut seen = BTreeSet::new();
    let mut sets = Vec::with_capacity(face_index_sets.len());
    for mut set in face_index_sets {
        if set.is_empty() {
            return Err(ModelError::EmptyFace);
        }
        set.sort_unstable();
        if set.windows(2).any(|w| w[0] == w[1]) || set.iter().any(|&i| i >= divisors.len()) {
            return Err(ModelError::UnknownDivisor(set));
        }
        if set.len() - 1 > n {
            return Err(ModelError::FaceTooLarge { dim: set.len() - 1, face: set, n });
        }
        if !seen.insert(set.clone()) {
            return Err(ModelError::DuplicateFace(set));
        }
        sets.push(set);
    }
    for set in &sets {
        if set.len() < 2 {
            continue;
        }
        // Codimension-one subfaces suffice: closure then follows by induction.
        for skip in 0..set.len() {
            let sub: Vec<usize> =
                set.iter().enumerate().filter(|&(k, _)| k != skip).map(|(_, &i)| i).collect();
            if !seen.contains(&sub) {
                return Err(ModelError::MissingSubface { face: set.clone(), missing: sub });
            }
        }
    }
    for d in &divisors {
        if !seen.contains(&vec![d.id]) {
            return Err(ModelError::MissingVertex(d.id));
        }
    }

    sets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let lookup = sets.iter().enumerate().map(|(k, s)| (s.clone(), k)).collect();
    let faces = sets.into_iter().map(|index_set| Face { index_set }).collect();
    Ok(SncModel { divisors, faces, semistable, dimension: n, lookup })
}

impl SncModel {
    /// The `I_N` cycle: `N` reduced rational curves meeting in a ring, with
    /// all weights zero. Used throughout as the elementary 1-dimensional model.
    pub fn cycle(len: usize) -> Result<SncModel, ModelError> {
        let divisors = (0..len).map(Divisor::reduced).collect();
        let mut faces: Vec<Vec<usize>> = (0..len).map(|i| vec![i]).collect();
        faces.extend((0..len).map(|i| vec![i, (i + 1) % len]));
        build_model(divisors, faces, 1, true)
    }

    /// The full `n`-simplex on `n + 1` reduced divisors with the given weights.
    pub fn simplex(n: usize, weights: Vec<Rational>) -> Result<SncModel, ModelError> {
        assert_eq!(weights.len(), n + 1, "one weight per vertex");
        let divisors = weights.into_iter().enumerate().map(|(i, a)| Divisor::new(i, 1, a)).collect();
        let faces = nonempty_subsets(&(0..=n).collect::<Vec<_>>());
        build_model(divisors, faces, n, true)
    }

    pub fn divisors(&self) -> &[Divisor] {
        &self.divisors
    }

    pub fn divisor(&self, i: usize) -> &Divisor {
        &self.divisors[i]
    }

    pub fn multiplicity(&self, i: usize) -> u32 {
        self.divisors[i].multiplicity
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn face(&self, k: usize) -> &Face {
        &self.faces[k]
    }

    pub fn semistable(&self) -> bool {
        self.semistable
    }

    /// Relative dimension `n` of the degeneration.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Index of the face with the given (unsorted) index set.
    pub fn face_index(&self, set: &[usize]) -> Option<usize> {
        let mut key = set.to_vec();
        key.sort_unstable();
        self.lookup.get(&key).copied()
    }

    pub fn is_face(&self, set: &[usize]) -> bool {
        set.is_empty() || self.face_index(set).is_some()
    }

    pub fn vertex_face(&self, i: usize) -> usize {
        self.face_index(&[i]).expect("validated models have all vertex faces")
    }

    /// Whether `E_i` meets the stratum `E_J` (or lies in it).
    pub fn meets(&self, i: usize, stratum: &[usize]) -> bool {
        if stratum.contains(&i) {
            return true;
        }
        let mut set = stratum.to_vec();
        set.push(i);
        self.is_face(&set)
    }

    /// Faces of top dimension `n`.
    pub fn top_faces(&self) -> impl Iterator<Item = usize> + '_ {
        let n = self.dimension;
        self.faces.iter().enumerate().filter(move |(_, f)| f.dim() == n).map(|(k, _)| k)
    }

    /// Validates a chart point of face `k` exactly.
    pub fn check_chart_point(&self, k: usize, x: &[Rational]) -> Result<(), ChartError> {
        let face = &self.faces[k];
        if x.len() != face.index_set.len() {
            return Err(ChartError::DimensionMismatch { expected: face.index_set.len(), got: x.len() });
        }
        let one = Rational::one();
        if x.iter().any(|v| *v < Rational::zero() || *v > one) {
            return Err(ChartError::OutOfRange);
        }
        let total: Rational = face
            .index_set
            .iter()
            .zip(x)
            .map(|(&i, v)| v * int(self.multiplicity(i) as i64))
            .sum();
        if total != one {
            return Err(ChartError::OffChart);
        }
        Ok(())
    }

    /// Chart coordinates of the vertex `q_i`: `x_i = 1 / b_i`.
    pub fn vertex_point(&self, i: usize) -> Vec<Rational> {
        vec![Rational::new(1.into(), (self.multiplicity(i) as i64).into())]
    }

    /// Drops the first coordinate of a full chart point.
    pub fn reduce(&self, x: &[Rational]) -> Vec<Rational> {
        x[1..].to_vec()
    }

    /// Reconstructs the eliminated coordinate `x_{j_0}` from a reduced point.
    pub fn lift<S: Scalar>(&self, k: usize, reduced: &[S]) -> Vec<S> {
        let face = &self.faces[k];
        let b0 = S::from_int(self.multiplicity(face.index_set[0]) as i64);
        let mut rest = S::one();
        for (&i, v) in face.index_set[1..].iter().zip(reduced) {
            rest = rest - &(S::from_int(self.multiplicity(i) as i64) * v);
        }
        let mut out = Vec::with_capacity(reduced.len() + 1);
        out.push(rest / &b0);
        out.extend(reduced.iter().cloned());
        out
    }

    /// Volume of face `k` in its reduced chart: `1 / (p! prod_{k>=1} b_{j_k})`.
    pub fn chart_volume(&self, k: usize) -> Rational {
        let face = &self.faces[k];
        let prod: i64 = face.index_set[1..].iter().map(|&i| self.multiplicity(i) as i64).product();
        let p = face.dim();
        Rational::new(1.into(), (factorial(p) as i64 * prod).into())
    }

    /// Rational lattice points of face `k` with `b_i x_i` in `(1/denom) Z`.
    pub fn lattice_points(&self, k: usize, denom: u32) -> Vec<Vec<Rational>> {
        let face = &self.faces[k];
        let mut out = Vec::new();
        let mut parts = vec![0u32; face.index_set.len()];
        compositions(denom, 0, &mut parts, &mut |parts| {
            let point = face
                .index_set
                .iter()
                .zip(parts)
                .map(|(&i, &m)| Rational::new((m as i64).into(), (denom as i64 * self.multiplicity(i) as i64).into()))
                .collect();
            out.push(point);
        });
        out
    }
}

fn compositions(remaining: u32, slot: usize, parts: &mut [u32], emit: &mut impl FnMut(&[u32])) {
    if slot + 1 == parts.len() {
        parts[slot] = remaining;
        emit(parts);
        return;
    }
    for m in 0..=remaining {
        parts[slot] = m;
        compositions(remaining - m, slot + 1, parts, emit);
    }
}

pub fn nonempty_subsets(items: &[usize]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << items.len()) {
        out.push(items.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &i)| i).collect());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EssentialSkeleton {
    /// Indices into [`SncModel::faces`].
    pub faces: Vec<usize>,
    pub dim: Option<usize>,
    /// `dim Sk = n`.
    pub maximal: bool,
}

/// Faces all of whose vertices have weight `a_i = 0`.
pub fn essential_skeleton(model: &SncModel) -> EssentialSkeleton {
    let faces: Vec<usize> = model
        .faces
        .iter()
        .enumerate()
        .filter(|(_, f)| f.index_set.iter().all(|&i| model.divisors[i].weight.is_zero()))
        .map(|(k, _)| k)
        .collect();
    let dim = faces.iter().map(|&k| model.faces[k].dim()).max();
    EssentialSkeleton { maximal: dim == Some(model.dimension), faces, dim }
}

/// `min_alpha sum_i alpha_i x_i` over a nonempty monomial support: the
/// monomial valuation at `x` of any `f = sum f_alpha z^alpha` with exactly
/// this support.
pub fn monomial_valuation<S: Scalar>(x: &[S], support: &[Vec<u32>]) -> Result<S, ChartError> {
    let mut best: Option<S> = None;
    for alpha in support {
        if alpha.len() != x.len() {
            return Err(ChartError::DimensionMismatch { expected: x.len(), got: alpha.len() });
        }
        let v = alpha.iter().zip(x).fold(S::zero(), |acc, (&a, xi)| acc + &(S::from_int(a as i64) * xi));
        best = Some(match best {
            Some(b) if b <= v => b,
            _ => v,
        });
    }
    best.ok_or(ChartError::EmptySupport)
}

/// Limit of the pushforward of the normalized Calabi-Yau measure: uniform
/// with respect to `dx_1 ... dx_n` on the top faces of the skeleton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonMeasure {
    pub faces: Vec<usize>,
    /// Density per unit `dx_1 ... dx_n`, identical on every face.
    pub density: Rational,
    pub face_mass: Rational,
    pub total: Rational,
}

pub fn lebesgue_measure(model: &SncModel) -> Result<SkeletonMeasure, MeasureError> {
    if !model.semistable {
        return Err(MeasureError::NotSemistable);
    }
    let sk = essential_skeleton(model);
    if !sk.maximal {
        return Err(MeasureError::NotMaximal { dim: sk.dim, n: model.dimension });
    }
    let n = model.dimension;
    let faces: Vec<usize> = sk.faces.into_iter().filter(|&k| model.faces[k].dim() == n).collect();
    let volume: Rational = faces.iter().map(|&k| model.chart_volume(k)).sum();
    let density = volume.recip();
    let face_mass = model.chart_volume(faces[0]) * &density;
    let total = faces.iter().map(|&k| model.chart_volume(k) * &density).sum();
    Ok(SkeletonMeasure { faces, density, face_mass, total })
}
