use std::path::Path;

use nama::real_ma::{ma_measure, ma_measure_oracle, solve as solve_ma, ConvexPL, Domain, Scheme, SolveError, SolverOptions, TargetMeasure};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{base_config, tolerance};
use crate::input::{display, numeric_table, parse_json, read_text, InputResult};
use crate::output::{coord_columns, float, Report, Table};
use crate::{Cli, SchemeArg};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum TargetKind {
    /// The total `density * vol` split equally among interior nodes.
    Uniform,
    /// `density` times each node's Voronoi cell.
    Voronoi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum BoundaryKind {
    Zero,
    /// `|x|^2 / 2`.
    HalfNormSquared,
}

impl BoundaryKind {
    fn value(self, x: &[f64]) -> f64 {
        match self {
            BoundaryKind::Zero => 0.0,
            BoundaryKind::HalfNormSquared => 0.5 * x.iter().map(|v| v * v).sum::<f64>(),
        }
    }
}

/// `{"lo": [0, 0], "hi": [1, 1], "grid": 9, "density": 1.0,
///   "target": "uniform", "boundary": "half_norm_squared"}`
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveConfig {
    lo: Vec<f64>,
    hi: Vec<f64>,
    grid: usize,
    density: f64,
    #[serde(default = "default_target")]
    target: TargetKind,
    boundary: BoundaryKind,
}

fn default_target() -> TargetKind {
    TargetKind::Uniform
}

/// Tensor grid with `count` nodes per axis; the first axis varies slowest.
fn tensor_grid(lo: &[f64], hi: &[f64], count: usize) -> Vec<Vec<f64>> {
    let mut nodes = vec![Vec::new()];
    for (a, b) in lo.iter().zip(hi) {
        let h = (b - a) / (count - 1) as f64;
        nodes = nodes
            .into_iter()
            .flat_map(|p: Vec<f64>| {
                (0..count).map(move |i| {
                    let mut q = p.clone();
                    q.push(if i + 1 == count { *b } else { a + i as f64 * h });
                    q
                })
            })
            .collect();
    }
    nodes
}

pub fn solve(
    cli: &Cli,
    path: &Path,
    grid: Option<usize>,
    scheme: Option<SchemeArg>,
    max_iter: Option<usize>,
) -> InputResult<Report> {
    let (abs, text) = read_text(path)?;
    let mut cfg: SolveConfig = parse_json(&abs, &text)?;
    if let Some(g) = grid {
        cfg.grid = g;
    }
    if cfg.grid < 3 {
        return Err(format!("grid must have at least 3 nodes per axis, got {}", cfg.grid));
    }
    if !(cfg.density.is_finite() && cfg.density > 0.0) {
        return Err(format!("density must be positive, got {}", cfg.density));
    }
    let tol = tolerance(cli, SolverOptions::default().tol)?;
    let scheme = scheme.unwrap_or(SchemeArg::Newton);
    let options = SolverOptions {
        tol,
        max_iter: max_iter.unwrap_or(SolverOptions::default().max_iter),
        scheme: match scheme {
            SchemeArg::Newton => Scheme::DampedNewton,
            SchemeArg::Lifting => Scheme::NodeLifting,
        },
    };
    let domain = Domain::cuboid(&cfg.lo, &cfg.hi).map_err(|e| e.to_string())?;
    let nodes = tensor_grid(&cfg.lo, &cfg.hi, cfg.grid);
    let target = match cfg.target {
        TargetKind::Uniform => TargetMeasure::uniform(&domain, &nodes, cfg.density),
        TargetKind::Voronoi => TargetMeasure::from_density(&domain, &nodes, cfg.density),
    }
    .map_err(|e| e.to_string())?;
    let boundary: Vec<f64> = nodes.iter().map(|x| cfg.boundary.value(x)).collect();

    let mut config = base_config(cli, tol);
    config.insert("config".into(), display(&abs).into());
    config.insert("document".into(), serde_json::to_value(&cfg).unwrap());
    config.insert("scheme".into(), format!("{scheme:?}").to_lowercase().into());
    config.insert("max_iter".into(), options.max_iter.into());
    let mut report = Report::new("realma solve", config);

    let (function, masses, residual, iterations) = match solve_ma(&domain, &nodes, &target, &boundary, &options) {
        Ok(sol) => (sol.function, sol.masses, sol.residual, Some(sol.iterations)),
        Err(SolveError::NonConvergence { best, residual, iterations }) => {
            report.pass = false;
            let masses = ma_measure(&best).masses;
            (*best, masses, residual, Some(iterations))
        }
        Err(e) => return Err(e.to_string()),
    };
    let dim = cfg.lo.len();
    let mut header = coord_columns("x", dim);
    header.extend(["value".to_string(), "mass".to_string()]);
    let mut solution = Table::new("solution.csv", header.clone());
    let mut targets = Table::new("target.csv", header);
    for (k, x) in nodes.iter().enumerate() {
        let mut row: Vec<String> = x.iter().map(|v| float(*v)).collect();
        let mut trow = row.clone();
        row.extend([float(function.values()[k]), float(masses[k])]);
        trow.extend([float(boundary[k]), float(target.masses[k])]);
        solution.push(row);
        targets.push(trow);
    }
    report.note("residual", residual);
    report.note("iterations", iterations.map(Value::from).unwrap_or(Value::Null));
    report.note("nodes", nodes.len());
    if cfg.boundary == BoundaryKind::HalfNormSquared {
        let dev = function
            .interior()
            .map(|k| (function.values()[k] - cfg.boundary.value(&nodes[k])).abs())
            .fold(0.0, f64::max);
        report.note("sup_distance_to_boundary_extension", dev);
    }
    report.message = format!(
        "realma solve: {} nodes, mass residual {:e} ({})",
        nodes.len(),
        residual,
        if report.pass { "converged" } else { "not converged" }
    );
    report.tables = vec![solution, targets];
    Ok(report)
}

pub fn measure(cli: &Cli, path: &Path, oracle: Option<usize>) -> InputResult<Report> {
    let (abs, header, rows) = numeric_table(path)?;
    if header.len() < 2 || header.last().map(String::as_str) != Some("value") {
        return Err(format!("{}: header must be `x0, .., value`", abs.display()));
    }
    let dim = header.len() - 1;
    if rows.is_empty() {
        return Err(format!("{}: no nodes", abs.display()));
    }
    let nodes: Vec<Vec<f64>> = rows.iter().map(|r| r[..dim].to_vec()).collect();
    let values: Vec<f64> = rows.iter().map(|r| r[dim]).collect();
    let mut lo = nodes[0].clone();
    let mut hi = nodes[0].clone();
    for x in &nodes {
        for k in 0..dim {
            lo[k] = lo[k].min(x[k]);
            hi[k] = hi[k].max(x[k]);
        }
    }
    let domain = Domain::cuboid(&lo, &hi).map_err(|e| e.to_string())?;
    let pl = ConvexPL::new(domain, nodes.clone(), values.clone()).map_err(|e| e.to_string())?;
    let mu = ma_measure(&pl);
    let raster = match oracle {
        Some(res) => Some(ma_measure_oracle(&pl, res).ok_or("the oracle supports dimensions 1 and 2 only")?),
        None => None,
    };

    let mut config = base_config(cli, 0.0);
    config.insert("nodes".into(), display(&abs).into());
    config.insert("domain_lo".into(), lo.clone().into());
    config.insert("domain_hi".into(), hi.clone().into());
    config.insert("oracle".into(), oracle.map(Value::from).unwrap_or(Value::Null));
    let mut report = Report::new("realma measure", config);
    let mut h = coord_columns("x", dim);
    h.extend(["value".to_string(), "mass".to_string()]);
    if raster.is_some() {
        h.push("oracle_mass".into());
    }
    let mut table = Table::new("measure.csv", h);
    for (k, x) in nodes.iter().enumerate() {
        let mut row: Vec<String> = x.iter().map(|v| float(*v)).collect();
        row.extend([float(values[k]), float(mu.masses[k])]);
        if let Some(r) = &raster {
            row.push(float(r[k]));
        }
        table.push(row);
    }
    report.pass = mu.above_envelope.is_empty();
    report.note("total", mu.total());
    report.note("above_envelope", mu.above_envelope.clone());
    report.note("degenerate", mu.degenerate);
    if let Some(r) = &raster {
        let worst = r.iter().zip(&mu.masses).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        report.note("oracle_max_difference", worst);
    }
    report.message = format!(
        "realma measure: total mass {}, {} nodes above the envelope",
        float(mu.total()),
        mu.above_envelope.len()
    );
    report.tables = vec![table];
    Ok(report)
}
