use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{HybridError, Polynomial};

/// Samples per RNG stream. Chunk `k` always draws from stream `k`, so the
/// batch does not depend on how chunks are scheduled.
pub const CHUNK: usize = 1 << 16;

const DYADIC_BITS: u32 = 52;

/// The local model `prod_{i=0}^p z_i^{b_i} = t` near a `p`-dimensional
/// stratum, with `fiber` extra coordinates `z_{p+1}, .., z_n` and holomorphic
/// factor `u_J` of the volume form.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalModel {
    b: Vec<u32>,
    a: Vec<f64>,
    u: Polynomial,
    fiber: usize,
    t: Complex64,
}

impl LocalModel {
    pub fn new(b: Vec<u32>, u: Polynomial, fiber: usize, t: Complex64) -> Result<LocalModel, HybridError> {
        if b.is_empty() {
            return Err(HybridError::NoCoordinates);
        }
        if b.contains(&0) {
            return Err(HybridError::BadMultiplicity);
        }
        let r = t.norm();
        if !(r > 0.0 && r < 1.0) {
            return Err(HybridError::BadT(r));
        }
        let count = b.len() + fiber;
        if u.variables() > count {
            return Err(HybridError::UnknownVariable { used: u.variables() - 1, count });
        }
        if u.constant().norm() == 0.0 {
            return Err(HybridError::VanishingResidue);
        }
        let a = vec![0.0; b.len()];
        Ok(LocalModel { b, a, u, fiber, t })
    }

    /// `|t| = exp(-big_l)` with `arg t = 0`.
    pub fn with_log_scale(b: Vec<u32>, u: Polynomial, fiber: usize, big_l: f64) -> Result<LocalModel, HybridError> {
        LocalModel::new(b, u, fiber, Complex64::new((-big_l).exp(), 0.0))
    }

    /// Log discrepancies `a_j` of the divisors `z_j = 0`; the volume form
    /// picks up `prod |z_j|^{2 a_j}`.
    pub fn with_weights(mut self, a: Vec<f64>) -> Result<LocalModel, HybridError> {
        if a.len() != self.b.len() {
            return Err(HybridError::WeightCount { expected: self.b.len(), got: a.len() });
        }
        if a.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(HybridError::BadWeight);
        }
        self.a = a;
        Ok(self)
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.b
    }

    pub fn weights(&self) -> &[f64] {
        &self.a
    }

    pub fn residue(&self) -> &Polynomial {
        &self.u
    }

    /// Dimension `p` of the simplex.
    pub fn simplex_dim(&self) -> usize {
        self.b.len() - 1
    }

    pub fn fiber(&self) -> usize {
        self.fiber
    }

    pub fn t(&self) -> Complex64 {
        self.t
    }

    /// `|log |t||`.
    pub fn log_scale(&self) -> f64 {
        -self.t.norm().ln()
    }

    /// `gcd b_i`: the number of sheets of the torus fibre over a point.
    pub fn sheets(&self) -> u32 {
        self.b.iter().fold(0, |g, &v| num_integer::gcd(g, v))
    }

    /// Lebesgue volume of the simplex in the coordinates `x_1, .., x_p`.
    pub fn chart_volume(&self) -> f64 {
        let p = self.simplex_dim();
        let prod: f64 = self.b[1..].iter().map(|&v| v as f64).product();
        1.0 / (crate::scalar::factorial(p) as f64 * prod)
    }

    /// Importance weight `|u_J(z)|^2 / |u_J(0)|^2 prod |z_j|^{2 a_j}` at the
    /// point with log coordinates `x` and angles `theta`; fibre coordinates
    /// are held at 0.
    pub fn weight(&self, x: &[f64], theta: &[f64]) -> f64 {
        let big_l = self.log_scale();
        let mut z = vec![Complex64::new(0.0, 0.0); self.b.len() + self.fiber];
        for i in 0..self.b.len() {
            z[i] = Complex64::from_polar((-big_l * x[i]).exp(), theta[i]);
        }
        let damping: f64 = self.a.iter().zip(x).map(|(a, xi)| a * xi).sum();
        let ratio = self.u.evaluate(&z).norm_sqr() / self.u.constant().norm_sqr();
        ratio * (-2.0 * big_l * damping).exp()
    }

    /// Average of [`LocalModel::weight`] over the torus fibre above `x`, on a
    /// grid of `resolution` angles per free direction and every sheet.
    pub fn fibre_mean_weight(&self, x: &[f64], resolution: usize) -> f64 {
        let coords = self.b.len();
        let free = coords - 1;
        let cells = resolution.pow(free as u32);
        let b0 = self.b[0];
        let mut total = 0.0;
        let mut theta = vec![0.0; coords];
        for code in 0..cells {
            let mut rest = code;
            let mut phase = self.t.arg();
            for i in 1..coords {
                theta[i] = TAU * (rest % resolution) as f64 / resolution as f64;
                rest /= resolution;
                phase -= self.b[i] as f64 * theta[i];
            }
            for sheet in 0..b0 {
                theta[0] = ((phase + TAU * sheet as f64) / b0 as f64).rem_euclid(TAU);
                total += self.weight(x, &theta);
            }
        }
        total / (cells as f64 * b0 as f64)
    }
}

/// Samples drawn uniformly in `(x, theta)`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub seed: u64,
    /// `p + 1` per sample.
    pub coords: usize,
    /// Weighted coordinates `y_i = b_i x_i`; each row sums to 1 exactly.
    pub y: Vec<f64>,
    pub theta: Vec<f64>,
    pub weights: Vec<f64>,
    multiplicities: Vec<u32>,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn y_row(&self, k: usize) -> &[f64] {
        &self.y[k * self.coords..(k + 1) * self.coords]
    }

    pub fn theta_row(&self, k: usize) -> &[f64] {
        &self.theta[k * self.coords..(k + 1) * self.coords]
    }

    /// Log coordinates `x_i = log|z_i| / log|t|`.
    pub fn x_row(&self, k: usize) -> Vec<f64> {
        self.y_row(k).iter().zip(&self.multiplicities).map(|(y, &b)| y / b as f64).collect()
    }
}

/// Draws `count` samples; identical inputs give bit-identical batches.
pub fn sample_cy_measure(model: &LocalModel, count: usize, seed: u64) -> SampleBatch {
    let coords = model.b.len();
    let chunks = count.div_ceil(CHUNK);
    let parts: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(count - c * CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut y = Vec::with_capacity(len * coords);
            let mut theta = Vec::with_capacity(len * coords);
            let mut weights = Vec::with_capacity(len);
            let mut cuts = vec![0u64; coords - 1];
            let mut x = vec![0.0; coords];
            let mut th = vec![0.0; coords];
            for _ in 0..len {
                for v in cuts.iter_mut() {
                    *v = rng.gen_range(0..=1u64 << DYADIC_BITS);
                }
                cuts.sort_unstable();
                let scale = (1u64 << DYADIC_BITS) as f64;
                let mut prev = 0u64;
                for i in 0..coords {
                    let next = if i + 1 < coords { cuts[i] } else { 1u64 << DYADIC_BITS };
                    let yi = (next - prev) as f64 / scale;
                    prev = next;
                    y.push(yi);
                    x[i] = yi / model.b[i] as f64;
                }
                let mut phase = model.t.arg();
                for i in 1..coords {
                    th[i] = rng.gen_range(0.0..TAU);
                    phase -= model.b[i] as f64 * th[i];
                }
                let sheet = rng.gen_range(0..model.b[0]) as f64;
                th[0] = ((phase + TAU * sheet) / model.b[0] as f64).rem_euclid(TAU);
                theta.extend_from_slice(&th);
                weights.push(model.weight(&x, &th));
            }
            (y, theta, weights)
        })
        .collect();
    let mut batch = SampleBatch {
        seed,
        coords,
        y: Vec::with_capacity(count * coords),
        theta: Vec::with_capacity(count * coords),
        weights: Vec::with_capacity(count),
        multiplicities: model.b.clone(),
    };
    for (y, theta, w) in parts {
        batch.y.extend(y);
        batch.theta.extend(theta);
        batch.weights.extend(w);
    }
    batch
}
