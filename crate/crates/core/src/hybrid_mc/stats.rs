use std::f64::consts::TAU;

use super::{sample_cy_measure, HybridError, LocalModel, SampleBatch};

/// Default dyadic level of the partition: cells of side `1/4`. The deviation
/// from Lebesgue measure lives in strips of width about `1 / (2 |log |t||)`
/// along the boundary; cells much wider than the strip see it scale like
/// `1 / |log |t||`, while narrower cells carry a large second-order term.
pub const DEFAULT_LEVEL: u32 = 2;

/// Weighted sample counts in one cell of the dyadic partition of the
/// reduced simplex `{y_1, .., y_p >= 0, sum y_i <= 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStat {
    pub index: Vec<usize>,
    pub count: u64,
    pub weight_sum: f64,
    /// Probability of the cell under the normalized Lebesgue measure.
    pub expected: f64,
    /// Normalized weight in the cell.
    pub observed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PushforwardDistance {
    /// Kolmogorov–Smirnov distance for `p = 1`, largest per-cell deviation
    /// for `p >= 2`.
    pub statistic: f64,
    /// `1 / sqrt(N_eff)` with `N_eff = (sum w)^2 / sum w^2`.
    pub standard_error: f64,
    pub effective_samples: f64,
    pub cells: Vec<CellStat>,
}

/// `|{u in [0,1]^p : sum u <= s}|` times `p!`, for integer `s >= 0`.
fn scaled_cube_slice(p: usize, s: i64) -> f64 {
    let mut total: i128 = 0;
    let mut binom: i128 = 1;
    for j in 0..=p as i64 {
        if s > j {
            let term = binom * ((s - j) as i128).pow(p as u32);
            total += if j % 2 == 0 { term } else { -term };
        }
        binom = binom * (p as i128 - j as i128) / (j as i128 + 1);
    }
    total.min(crate::scalar::factorial(p) as i128) as f64
}

/// Exact cell probabilities and weighted counts at dyadic level `level`.
pub fn dyadic_cells(batch: &SampleBatch, level: u32) -> Vec<CellStat> {
    let p = batch.coords - 1;
    if p == 0 {
        let total: f64 = batch.weights.iter().sum();
        return vec![CellStat {
            index: Vec::new(),
            count: batch.len() as u64,
            weight_sum: total,
            expected: 1.0,
            observed: 1.0,
        }];
    }
    let side = 1usize << level;
    let cells = side.pow(p as u32);
    let mut counts = vec![0u64; cells];
    let mut sums = vec![0.0; cells];
    for k in 0..batch.len() {
        let row = batch.y_row(k);
        let mut code = 0;
        for v in &row[1..] {
            code = code * side + ((v * side as f64) as usize).min(side - 1);
        }
        counts[code] += 1;
        sums[code] += batch.weights[k];
    }
    let total: f64 = sums.iter().sum();
    let h = (side as f64).powi(-(p as i32));
    let mut out = Vec::new();
    for code in 0..cells {
        let mut index = vec![0; p];
        let mut rest = code;
        for slot in index.iter_mut().rev() {
            *slot = rest % side;
            rest /= side;
        }
        let s = side as i64 - index.iter().sum::<usize>() as i64;
        if s <= 0 {
            continue;
        }
        out.push(CellStat {
            index,
            count: counts[code],
            weight_sum: sums[code],
            expected: h * scaled_cube_slice(p, s),
            observed: sums[code] / total,
        });
    }
    out
}

/// Weighted Kolmogorov–Smirnov distance of samples in `[0, 1]` from the
/// uniform distribution.
pub fn ks_uniform(values: &[f64], weights: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let total: f64 = weights.iter().sum();
    let mut below = 0.0;
    let mut worst: f64 = 0.0;
    for &k in &order {
        let x = values[k].clamp(0.0, 1.0);
        worst = worst.max((below / total - x).abs());
        below += weights[k];
        worst = worst.max((below / total - x).abs());
    }
    worst
}

/// Distance of the pushforward of the weighted batch from the normalized
/// Lebesgue measure on the simplex.
pub fn pushforward_distance(batch: &SampleBatch, level: u32) -> PushforwardDistance {
    let sum: f64 = batch.weights.iter().sum();
    let sq: f64 = batch.weights.iter().map(|w| w * w).sum();
    let effective_samples = sum * sum / sq;
    let cells = dyadic_cells(batch, level);
    let p = batch.coords - 1;
    let statistic = match p {
        0 => 0.0,
        1 => {
            let values: Vec<f64> = (0..batch.len()).map(|k| batch.y_row(k)[1]).collect();
            ks_uniform(&values, &batch.weights)
        }
        _ => cell_distance(&cells),
    };
    PushforwardDistance { statistic, standard_error: 1.0 / effective_samples.sqrt(), effective_samples, cells }
}

/// `max |observed - expected|` over cells.
pub fn cell_distance(cells: &[CellStat]) -> f64 {
    cells.iter().map(|c| (c.observed - c.expected).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegralEstimate {
    pub value: f64,
    pub standard_error: f64,
}

/// Monte Carlo estimate of `int sqrt(-1)^{n^2} Omega_t ^ conj(Omega_t)` over
/// the region of the local model above the simplex, summed over the `b_0`
/// roots `z_0` and with fibre directions contributing a unit factor.
pub fn volume_integral(model: &LocalModel, batch: &SampleBatch) -> IntegralEstimate {
    let p = model.simplex_dim() as i32;
    let n = batch.len() as f64;
    let mean = batch.weights.iter().sum::<f64>() / n;
    let var = batch.weights.iter().map(|w| (w - mean) * (w - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    let scale = model.multiplicities()[0] as f64
        * (2.0 * TAU * model.log_scale()).powi(p)
        * model.chart_volume();
    IntegralEstimate { value: scale * mean, standard_error: scale * (var / n).sqrt() }
}

/// `2^p (2 pi)^p L^p / p!` for `u_J = 1`, reduced divisors and no damping.
pub fn flat_integral(p: usize, log_scale: f64) -> f64 {
    (2.0 * TAU * log_scale).powi(p as i32) / crate::scalar::factorial(p) as f64
}

/// `|{j : a_j = 0}| - 1`.
pub fn expected_growth_order(model: &LocalModel) -> i64 {
    model.weights().iter().filter(|&&a| a == 0.0).count() as i64 - 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthPoint {
    pub log_scale: f64,
    pub integral: IntegralEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrowthFit {
    /// Least-squares slope of `log integral` against `log |log |t||`.
    pub exponent: f64,
    pub intercept: f64,
    pub points: Vec<GrowthPoint>,
}

/// Fits the growth order over a family of models differing in `t`. Every
/// model is sampled with the same seed.
pub fn volume_growth_exponent(models: &[LocalModel], count: usize, seed: u64) -> Result<GrowthFit, HybridError> {
    let mut scales: Vec<f64> = models.iter().map(|m| m.log_scale()).collect();
    scales.sort_by(f64::total_cmp);
    scales.dedup();
    if scales.len() < 2 {
        return Err(HybridError::TooFewScales);
    }
    let points: Vec<GrowthPoint> = models
        .iter()
        .map(|m| GrowthPoint { log_scale: m.log_scale(), integral: volume_integral(m, &sample_cy_measure(m, count, seed)) })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.log_scale.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.integral.value.ln()).collect();
    let (exponent, intercept) = least_squares(&xs, &ys);
    Ok(GrowthFit { exponent, intercept, points })
}

/// Slope and intercept of the least-squares line through `(x_k, y_k)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}
