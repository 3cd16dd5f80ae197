use nama::hybrid_mc::{
    expected_growth_order, flat_integral, pushforward_distance, sample_cy_measure, volume_growth_exponent, LocalModel,
    Polynomial, DEFAULT_LEVEL,
};
use serde_json::{Map, Value};

use super::{base_config, tolerance};
use crate::input::InputResult;
use crate::output::{coord_columns, float, Report, Table};
use crate::{Cli, LocalModelArgs};

fn models(local: &LocalModelArgs) -> InputResult<(Polynomial, Vec<LocalModel>)> {
    let u: Polynomial = local.u_j.parse().map_err(|e| format!("--uJ: {e}"))?;
    let b = local.b.clone().unwrap_or_else(|| vec![1; local.n + 1]);
    if b.len() != local.n + 1 {
        return Err(format!("--b needs {} multiplicities", local.n + 1));
    }
    if local.samples < 2 {
        return Err("--samples must be at least 2".into());
    }
    let mut out = Vec::with_capacity(local.t_exp.len());
    for &l in &local.t_exp {
        if !(l.is_finite() && l > 0.0) {
            return Err(format!("--t-exp values must be positive, got {l}"));
        }
        let mut m = LocalModel::with_log_scale(b.clone(), u.clone(), local.fiber, l).map_err(|e| e.to_string())?;
        if let Some(a) = &local.a {
            m = m.with_weights(a.clone()).map_err(|e| e.to_string())?;
        }
        out.push(m);
    }
    Ok((u, out))
}

fn local_config(cli: &Cli, tol: f64, local: &LocalModelArgs, u: &Polynomial) -> Map<String, Value> {
    let mut c = base_config(cli, tol);
    c.insert("n".into(), local.n.into());
    c.insert("t_exp".into(), local.t_exp.clone().into());
    c.insert("samples".into(), local.samples.into());
    c.insert("uJ".into(), u.to_string().into());
    c.insert("b".into(), local.b.clone().unwrap_or_else(|| vec![1; local.n + 1]).into());
    c.insert("a".into(), local.a.clone().unwrap_or_else(|| vec![0.0; local.n + 1]).into());
    c.insert("fiber".into(), local.fiber.into());
    c
}

pub fn pushforward(cli: &Cli, local: &LocalModelArgs, level: Option<u32>) -> InputResult<Report> {
    let (u, models) = models(local)?;
    let level = level.unwrap_or(DEFAULT_LEVEL);
    if level > 12 {
        return Err("--level is at most 12".into());
    }
    // Without --tol every statistic is reported and nothing is asserted.
    let tol = cli.tol.map(|_| tolerance(cli, 0.0)).transpose()?;
    let mut config = local_config(cli, 0.0, local, &u);
    config.insert("tol".into(), tol.map(Value::from).unwrap_or(Value::Null));
    config.insert("level".into(), level.into());
    let mut report = Report::new("hybrid pushforward", config);

    let p = local.n;
    let mut hist_header = vec!["t_exp".to_string()];
    hist_header.extend(coord_columns("cell", p));
    hist_header.extend(["count", "weight_sum", "expected", "observed"].map(String::from));
    let mut hist = Table::new("histogram.csv", hist_header);
    let mut summary =
        Table::with_columns("summary.csv", &["t_exp", "statistic", "standard_error", "effective_samples"]);
    let mut stats = Vec::new();
    for (m, &l) in models.iter().zip(&local.t_exp) {
        let batch = sample_cy_measure(m, local.samples, cli.seed);
        let d = pushforward_distance(&batch, level);
        for c in &d.cells {
            let mut row = vec![float(l)];
            row.extend(c.index.iter().map(|i| i.to_string()));
            row.extend([c.count.to_string(), float(c.weight_sum), float(c.expected), float(c.observed)]);
            hist.push(row);
        }
        summary.push(vec![float(l), float(d.statistic), float(d.standard_error), float(d.effective_samples)]);
        stats.push((l, d.statistic, d.standard_error));
    }
    if let Some(t) = tol {
        report.pass = stats.iter().all(|(_, s, _)| *s <= t);
    }
    report.note("statistics", stats.iter().map(|s| s.1).collect::<Vec<f64>>());
    report.note("standard_errors", stats.iter().map(|s| s.2).collect::<Vec<f64>>());
    if stats.len() >= 2 {
        report.note("ratio_last_to_first", stats[stats.len() - 1].1 / stats[0].1);
    }
    let line: Vec<String> =
        stats.iter().map(|(l, s, se)| format!("t_exp {} distance {:.4e} (se {:.2e})", float(*l), s, se)).collect();
    report.message = format!("hybrid pushforward: {}", line.join("; "));
    report.tables = vec![hist, summary];
    Ok(report)
}

pub fn growth(cli: &Cli, local: &LocalModelArgs) -> InputResult<Report> {
    let (u, models) = models(local)?;
    let tol = tolerance(cli, 0.1)?;
    let mut report = Report::new("hybrid growth", local_config(cli, tol, local, &u));
    let fit = volume_growth_exponent(&models, local.samples, cli.seed).map_err(|e| e.to_string())?;
    let expected = expected_growth_order(&models[0]);
    let mut table =
        Table::with_columns("growth.csv", &["t_exp", "integral", "standard_error", "flat_integral"]);
    for pt in &fit.points {
        table.push(vec![
            float(pt.log_scale),
            float(pt.integral.value),
            float(pt.integral.standard_error),
            float(flat_integral(local.n, pt.log_scale)),
        ]);
    }
    report.pass = (fit.exponent - expected as f64).abs() <= tol;
    report.note("exponent", fit.exponent);
    report.note("intercept", fit.intercept);
    report.note("expected", expected);
    report.message = format!("hybrid growth: fitted exponent {:.4}, expected {expected}", fit.exponent);
    report.tables = vec![table];
    Ok(report)
}
