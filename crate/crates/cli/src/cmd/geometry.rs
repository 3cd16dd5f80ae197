use std::path::Path;

use nalgebra::DMatrix;
use nama::geometry::{
    calabi_constant, calabi_ode_residual, fiber_lagrangian_residual, fiber_phase_residual, semiflat_form, volume_identity_check,
    CalabiPotential, FiberFrame, FiniteDifference,
};
use num_complex::Complex64;
use serde_json::Value;

use super::{base_config, tolerance};
use crate::input::{complex_matrix, display, real_matrix, InputResult};
use crate::output::{float, Report, Table};
use crate::Cli;

pub fn slag_check(cli: &Cli, hessian: &Path, scale: f64, base: Option<&[f64]>) -> InputResult<Report> {
    let tol = tolerance(cli, 1e-12)?;
    let (abs, h) = real_matrix(hessian)?;
    let n = h.nrows();
    let form = semiflat_form(&h, scale).map_err(|e| e.to_string())?;
    let base = base.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; n]);
    if base.len() != n {
        return Err(format!("--base needs {n} coordinates"));
    }
    let frame = FiberFrame::torus(base.clone());
    let lagrangian = fiber_lagrangian_residual(&form, &frame).map_err(|e| e.to_string())?;
    let phase = fiber_phase_residual(n, &frame).map_err(|e| e.to_string())?;

    let mut config = base_config(cli, tol);
    config.insert("hessian".into(), display(&abs).into());
    config.insert("L".into(), scale.into());
    config.insert("base".into(), base.into());
    let mut report = Report::new("geometry slag-check", config);
    let mut table = Table::with_columns("report.csv", &["check", "residual"]);
    table.push(vec!["lagrangian".into(), float(lagrangian)]);
    table.push(vec!["phase".into(), float(phase.residual)]);
    report.pass = lagrangian <= tol && phase.residual <= tol;
    report.note("lagrangian_residual", lagrangian);
    report.note("phase_residual", phase.residual);
    report.note("phase", phase.phase);
    report.note("positive", form.is_positive());
    report.message = format!("geometry slag-check: lagrangian {lagrangian:e}, phase {:e}", phase.residual);
    report.tables = vec![table];
    Ok(report)
}

pub fn calabi(cli: &Cli, n: usize, points: usize, lo: f64, hi: f64, finite_difference: bool) -> InputResult<Report> {
    if n == 0 {
        return Err("--n must be positive".into());
    }
    if points < 2 || !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err("need at least 2 points on a range 0 < lo < hi".into());
    }
    let tol = tolerance(cli, if finite_difference { 1e-4 } else { 1e-12 })?;
    let xs: Vec<f64> = (0..points)
        .map(|k| (lo.ln() + (hi.ln() - lo.ln()) * k as f64 / (points - 1) as f64).exp())
        .collect();
    let values: Vec<f64> = if finite_difference {
        let e = (n as f64 + 1.0) / n as f64;
        let mut out = Vec::with_capacity(xs.len());
        for &x in &xs {
            let fd = FiniteDifference { f: move |t: f64| t.powf(e), scale: x };
            out.push(calabi_ode_residual(n, &fd, &[x]).map_err(|e| e.to_string())?.constant);
        }
        out
    } else {
        calabi_ode_residual(n, &CalabiPotential { n }, &xs).map_err(|e| e.to_string())?.values
    };
    let expected = calabi_constant(n);
    let constant = values[0];
    let residual = values.iter().map(|v| (v - constant).abs()).fold(0.0, f64::max);

    let mut config = base_config(cli, tol);
    config.insert("n".into(), n.into());
    config.insert("points".into(), points.into());
    config.insert("lo".into(), lo.into());
    config.insert("hi".into(), hi.into());
    config.insert("finite_difference".into(), finite_difference.into());
    let mut report = Report::new("geometry calabi", config);
    let mut table = Table::with_columns("report.csv", &["x", "value", "deviation"]);
    for (x, v) in xs.iter().zip(&values) {
        table.push(vec![float(*x), float(*v), float(v - expected)]);
    }
    report.pass = residual <= tol && (constant - expected).abs() <= tol;
    report.note("constant", constant);
    report.note("expected", expected);
    report.note("residual", residual);
    report.message = format!("geometry calabi: constant {constant} (expected {expected}), spread {residual:e}");
    report.tables = vec![table];
    Ok(report)
}

pub fn gcalabi(
    cli: &Cli,
    m: usize,
    n: usize,
    scales: &[f64],
    p: &Path,
    q: &Path,
    b: Option<&Path>,
) -> InputResult<Report> {
    if m >= n {
        return Err(format!("need m < n, got m = {m}, n = {n}"));
    }
    let k = n - m;
    let tol = tolerance(cli, 0.05)?;
    let (p_abs, pm) = real_matrix(p)?;
    let (q_abs, qm) = complex_matrix(q)?;
    if pm.shape() != (m, m) {
        return Err(format!("P is {:?}, expected ({m}, {m})", pm.shape()));
    }
    if qm.shape() != (k, k) {
        return Err(format!("Q is {:?}, expected ({k}, {k})", qm.shape()));
    }
    let (b_abs, bm) = match b {
        Some(path) => {
            let (a, mat) = complex_matrix(path)?;
            if mat.shape() != (m, k) {
                return Err(format!("B is {:?}, expected ({m}, {k})", mat.shape()));
            }
            (Some(a), mat)
        }
        None => (None, DMatrix::from_element(m, k, Complex64::new(0.0, 0.0))),
    };
    let r = volume_identity_check(&pm, &qm, &bm, scales).map_err(|e| e.to_string())?;

    let mut config = base_config(cli, tol);
    config.insert("m".into(), m.into());
    config.insert("n".into(), n.into());
    config.insert("L".into(), scales.to_vec().into());
    config.insert("p".into(), display(&p_abs).into());
    config.insert("q".into(), display(&q_abs).into());
    config.insert("b".into(), b_abs.map(|a| Value::from(display(&a))).unwrap_or(Value::Null));
    let mut report = Report::new("geometry gcalabi", config);
    let mut table = Table::with_columns("report.csv", &["L", "relative_error"]);
    for (l, e) in &r.points {
        table.push(vec![float(*l), float(*e)]);
    }
    // With no resolvable error the identity holds to rounding at every L.
    report.pass = r.slope.is_none_or(|s| (s + 1.0).abs() <= tol);
    report.note("slope", r.slope.map(Value::from).unwrap_or(Value::Null));
    report.message = match r.slope {
        Some(s) => format!("geometry gcalabi: log-log slope {s:.4}"),
        None => "geometry gcalabi: relative error below rounding at every L".to_string(),
    };
    report.tables = vec![table];
    Ok(report)
}
