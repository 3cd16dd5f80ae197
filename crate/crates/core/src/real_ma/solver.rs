//! Dirichlet problem `MA(u) = target` for convex piecewise-linear `u`.
//!
//! The unknowns are the interior node values. The default scheme is a damped
//! Newton iteration on the map from values to subgradient masses; its
//! Jacobian has off-diagonal entries `|facet_kj| / |x_j - x_k|` and is solved
//! with a banded Cholesky factorization in lexicographic node order. The
//! alternative `NodeLifting` scheme moves each node by its own mass deficit
//! (a Jacobi-type relaxation), in the spirit of Oliker and Prussner.

use std::collections::BTreeMap;

use super::cell::Label;
use super::linalg::BandedSpd;
use super::{ma_measure, ConvexPL, Domain, RealMaError, TargetMeasure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    DampedNewton,
    NodeLifting,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Max-norm mass residual relative to the mean target mass.
    pub tol: f64,
    pub max_iter: usize,
    pub scheme: Scheme,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-8, max_iter: 100_000, scheme: Scheme::DampedNewton }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub function: ConvexPL<f64>,
    pub masses: Vec<f64>,
    /// Final relative max-norm residual.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { best: Box<ConvexPL<f64>>, residual: f64, iterations: usize },
    #[error("infeasible boundary data: {0}")]
    InfeasibleBoundary(String),
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error(transparent)]
    Geometry(#[from] RealMaError),
}

struct Evaluation {
    masses: Vec<f64>,
    /// `(k, j, |facet| / |x_j - x_k|)` for interior `k`.
    couplings: Vec<(usize, usize, f64)>,
}

fn evaluate(pl: &ConvexPL<f64>) -> Evaluation {
    let cells = pl.interior_cells();
    let mut masses = vec![0.0; cells.len()];
    let mut couplings = Vec::new();
    for (k, cell) in cells.iter().enumerate() {
        let Some(cell) = cell else { continue };
        masses[k] = cell.volume();
        let mut seen = Vec::new();
        for label in cell.labels() {
            if let Label::Node(j) = label {
                if seen.contains(&j) {
                    continue;
                }
                seen.push(j);
                let facet = cell.facet_measure(label);
                if facet > 0.0 {
                    let dist = pl.nodes()[j].iter().zip(&pl.nodes()[k]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    couplings.push((k, j, facet / dist));
                }
            }
        }
    }
    Evaluation { masses, couplings }
}

fn residual_norm(masses: &[f64], target: &[f64], interior: &[usize], mean: f64) -> f64 {
    interior.iter().map(|&k| (masses[k] - target[k]).abs()).fold(0.0, f64::max) / mean
}

/// Solves for interior values given `boundary_values` at the boundary nodes
/// (entries at interior nodes are ignored).
pub fn solve(
    domain: &Domain<f64>,
    nodes: &[Vec<f64>],
    target: &TargetMeasure,
    boundary_values: &[f64],
    options: &SolverOptions,
) -> Result<Solution, SolveError> {
    if target.masses.len() != nodes.len() || boundary_values.len() != nodes.len() {
        return Err(RealMaError::DimensionMismatch.into());
    }
    let n = domain.dimension();
    let probe = ConvexPL::new(domain.clone(), nodes.to_vec(), vec![0.0; nodes.len()])?;
    let interior: Vec<usize> = probe.interior().collect();
    let boundary: Vec<usize> = (0..nodes.len()).filter(|&k| probe.is_boundary(k)).collect();
    if interior.is_empty() {
        return Err(RealMaError::NoInteriorNodes.into());
    }
    if boundary.len() < n + 1 {
        return Err(SolveError::InfeasibleBoundary(format!("only {} boundary nodes", boundary.len())));
    }
    for &k in &boundary {
        if !boundary_values[k].is_finite() {
            return Err(SolveError::InfeasibleBoundary(format!("value at node {k} is not finite")));
        }
    }
    for &k in &interior {
        if !(target.masses[k] > 0.0 && target.masses[k].is_finite()) {
            return Err(SolveError::InvalidTarget(format!("mass at interior node {k} must be positive")));
        }
        if domain.inner_radius(&nodes[k]) <= 0.0 {
            return Err(SolveError::InfeasibleBoundary(format!("interior node {k} is not strictly inside")));
        }
    }
    check_boundary_convexity(domain, nodes, &boundary, boundary_values)?;

    let total: f64 = interior.iter().map(|&k| target.masses[k]).sum();
    let mean = total / interior.len() as f64;
    let density = target.density.unwrap_or(total / domain.volume());
    let lambda = 0.5 * density.powf(1.0 / n as f64);
    let c = domain.centroid();
    let dist2 = |x: &[f64]| x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    let r2 = domain.vertices().iter().map(|v| dist2(v)).fold(0.0, f64::max);
    let floor = boundary.iter().map(|&k| boundary_values[k]).fold(f64::INFINITY, f64::min);
    let mut values = boundary_values.to_vec();
    for &k in &interior {
        values[k] = floor + lambda * (dist2(&nodes[k]) - r2);
    }
    let pl = probe.with_values(values);

    match options.scheme {
        Scheme::DampedNewton => newton(pl, target, &interior, mean, options),
        Scheme::NodeLifting => lifting(pl, target, &interior, mean, options),
    }
}

fn check_boundary_convexity(
    domain: &Domain<f64>,
    nodes: &[Vec<f64>],
    boundary: &[usize],
    values: &[f64],
) -> Result<(), SolveError> {
    let shell = ConvexPL::new(
        domain.clone(),
        boundary.iter().map(|&k| nodes[k].clone()).collect(),
        boundary.iter().map(|&k| values[k]).collect(),
    )?;
    for (i, &k) in boundary.iter().enumerate() {
        if !shell.on_envelope(i) {
            return Err(SolveError::InfeasibleBoundary(format!("value at node {k} lies above the convex envelope")));
        }
    }
    Ok(())
}

fn lexicographic_order(pl: &ConvexPL<f64>, interior: &[usize]) -> Vec<usize> {
    let mut order = interior.to_vec();
    order.sort_by(|&a, &b| {
        pl.nodes()[a].iter().zip(&pl.nodes()[b]).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    order
}

fn newton(
    mut pl: ConvexPL<f64>,
    target: &TargetMeasure,
    interior: &[usize],
    mean: f64,
    options: &SolverOptions,
) -> Result<Solution, SolveError> {
    let order = lexicographic_order(&pl, interior);
    let slot: BTreeMap<usize, usize> = order.iter().enumerate().map(|(s, &k)| (k, s)).collect();
    let mut eval = evaluate(&pl);
    let mut err = residual_norm(&eval.masses, &target.masses, interior, mean);
    let min_target = interior.iter().map(|&k| target.masses[k]).fold(f64::INFINITY, f64::min);
    let min_start = interior.iter().map(|&k| eval.masses[k]).fold(f64::INFINITY, f64::min);
    let floor = 0.5 * min_target.min(min_start);
    let mut polishing = 0;
    let mut iterations = 0;
    loop {
        if err <= options.tol && polishing >= 3 {
            break;
        }
        if iterations >= options.max_iter {
            if err <= options.tol {
                break;
            }
            return Err(SolveError::NonConvergence { best: Box::new(pl), residual: err, iterations });
        }
        iterations += 1;

        let mut bw = 0;
        for &(k, j, _) in &eval.couplings {
            if let Some(&sj) = slot.get(&j) {
                bw = bw.max(slot[&k].abs_diff(sj));
            }
        }
        let mut m = BandedSpd::zeros(order.len(), bw);
        for &(k, j, w) in &eval.couplings {
            let sk = slot[&k];
            m.add(sk, sk, w);
            if let Some(&sj) = slot.get(&j) {
                if sj < sk {
                    // Both (k, j) and (j, k) are visited; average them.
                    m.add(sk, sj, -0.5 * w);
                } else {
                    m.add(sj, sk, -0.5 * w);
                }
            }
        }
        let mut step: Vec<f64> = order.iter().map(|&k| eval.masses[k] - target.masses[k]).collect();
        match m.factor() {
            Ok(chol) => chol.solve(&mut step),
            Err(_) => {
                if err <= options.tol {
                    break;
                }
                return Err(SolveError::NonConvergence { best: Box::new(pl), residual: err, iterations });
            }
        }

        let mut tau = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let mut values = pl.values().to_vec();
            for (s, &k) in order.iter().enumerate() {
                values[k] += tau * step[s];
            }
            let trial = pl.with_values(values);
            let e = evaluate(&trial);
            let trial_err = residual_norm(&e.masses, &target.masses, interior, mean);
            let admissible = interior.iter().all(|&k| e.masses[k] >= floor);
            let enough = if err <= options.tol { trial_err < 0.5 * err } else { trial_err <= (1.0 - 0.5 * tau) * err };
            if admissible && enough {
                accepted = Some((trial, e, trial_err));
                break;
            }
            if err <= options.tol {
                break;
            }
            tau *= 0.5;
        }
        match accepted {
            Some((trial, e, trial_err)) => {
                pl = trial;
                eval = e;
                err = trial_err;
                if err <= options.tol {
                    polishing += 1;
                }
            }
            None if err <= options.tol => break,
            None => return Err(SolveError::NonConvergence { best: Box::new(pl), residual: err, iterations }),
        }
    }
    let masses = ma_measure(&pl).masses;
    Ok(Solution { function: pl, masses, residual: err, iterations })
}

fn lifting(
    mut pl: ConvexPL<f64>,
    target: &TargetMeasure,
    interior: &[usize],
    mean: f64,
    options: &SolverOptions,
) -> Result<Solution, SolveError> {
    let mut eval = evaluate(&pl);
    let mut err = residual_norm(&eval.masses, &target.masses, interior, mean);
    let min_target = interior.iter().map(|&k| target.masses[k]).fold(f64::INFINITY, f64::min);
    let floor = 0.25 * min_target.min(interior.iter().map(|&k| eval.masses[k]).fold(f64::INFINITY, f64::min));
    let mut iterations = 0;
    let mut omega: f64 = 0.9;
    while err > options.tol {
        if iterations >= options.max_iter {
            return Err(SolveError::NonConvergence { best: Box::new(pl), residual: err, iterations });
        }
        iterations += 1;
        let mut diag = vec![0.0; pl.nodes().len()];
        for &(k, _, w) in &eval.couplings {
            diag[k] += w;
        }
        loop {
            let mut values = pl.values().to_vec();
            for &k in interior {
                values[k] += omega * (eval.masses[k] - target.masses[k]) / diag[k];
            }
            let trial = pl.with_values(values);
            let e = evaluate(&trial);
            if interior.iter().all(|&k| e.masses[k] >= floor) {
                pl = trial;
                eval = e;
                break;
            }
            omega *= 0.5;
            if omega < 1e-12 {
                return Err(SolveError::NonConvergence { best: Box::new(pl), residual: err, iterations });
            }
        }
        err = residual_norm(&eval.masses, &target.masses, interior, mean);
    }
    let masses = ma_measure(&pl).masses;
    Ok(Solution { function: pl, masses, residual: err, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_nodes(count: usize) -> Vec<Vec<f64>> {
        (0..=count).map(|i| vec![i as f64 / count as f64]).collect()
    }

    #[test]
    fn one_dimensional_quadratic_is_exact() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        let nodes = unit_nodes(10);
        let t = TargetMeasure::from_density(&d, &nodes, 2.0).unwrap();
        let sol = solve(&d, &nodes, &t, &vec![0.0; nodes.len()], &SolverOptions::default()).unwrap();
        for (x, v) in nodes.iter().zip(sol.function.values()) {
            assert!((v - (x[0] * x[0] - x[0])).abs() < 1e-13);
        }
    }

    #[test]
    fn single_node_tent() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        let nodes = vec![vec![0.0], vec![0.5], vec![1.0]];
        let m = 0.8;
        let t = TargetMeasure::from_masses(vec![0.0, m, 0.0]);
        let sol = solve(&d, &nodes, &t, &[0.0, 0.0, 0.0], &SolverOptions::default()).unwrap();
        assert!((sol.function.values()[1] + m / 4.0).abs() < 1e-14);
    }

    #[test]
    fn lifting_matches_newton() {
        let d = Domain::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let nodes: Vec<Vec<f64>> = (0..5).flat_map(|i| (0..5).map(move |j| vec![i as f64 / 4.0, j as f64 / 4.0])).collect();
        let bv: Vec<f64> = nodes.iter().map(|x| 0.5 * (x[0] * x[0] + x[1] * x[1])).collect();
        let t = TargetMeasure::uniform(&d, &nodes, 1.0).unwrap();
        let a = solve(&d, &nodes, &t, &bv, &SolverOptions::default()).unwrap();
        let opts = SolverOptions { scheme: Scheme::NodeLifting, ..SolverOptions::default() };
        let b = solve(&d, &nodes, &t, &bv, &opts).unwrap();
        for (u, v) in a.function.values().iter().zip(b.function.values()) {
            assert!((u - v).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let d = Domain::interval(0.0, 1.0).unwrap();
        let nodes = unit_nodes(4);
        let t = TargetMeasure::from_density(&d, &nodes, 1.0).unwrap();
        let mut bv = vec![0.0; 5];
        bv[0] = f64::NAN;
        assert!(matches!(solve(&d, &nodes, &t, &bv, &SolverOptions::default()), Err(SolveError::InfeasibleBoundary(_))));
        let zero = TargetMeasure::from_masses(vec![0.0; 5]);
        assert!(matches!(
            solve(&d, &nodes, &zero, &[0.0; 5], &SolverOptions::default()),
            Err(SolveError::InvalidTarget(_))
        ));
        let capped = SolverOptions { max_iter: 0, ..SolverOptions::default() };
        let t2 = TargetMeasure::from_masses(vec![0.0, 1.0, 2.0, 3.0, 0.0]);
        assert!(matches!(solve(&d, &nodes, &t2, &[0.0; 5], &capped), Err(SolveError::NonConvergence { .. })));
    }

    #[test]
    fn non_convex_boundary_is_infeasible() {
        let d = Domain::cuboid(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let nodes: Vec<Vec<f64>> = (0..3).flat_map(|i| (0..3).map(move |j| vec![i as f64 / 2.0, j as f64 / 2.0])).collect();
        let mut bv = vec![0.0; 9];
        bv[1] = 5.0;
        let t = TargetMeasure::uniform(&d, &nodes, 1.0).unwrap();
        assert!(matches!(solve(&d, &nodes, &t, &bv, &SolverOptions::default()), Err(SolveError::InfeasibleBoundary(_))));
    }
}
