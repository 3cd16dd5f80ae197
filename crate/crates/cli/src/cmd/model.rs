use std::path::Path;

use nama::na_potential::{na_ma_model_metric, NaError};
use nama::skeleton::{essential_skeleton, lebesgue_measure};
use nama::scalar::int;
use serde_json::Value;

use super::base_config;
use crate::input::{display, read_model, InputResult};
use crate::output::{join_ids, rational, Report, Table};
use crate::Cli;

fn model_config(cli: &Cli, path: &Path, document: Value) -> serde_json::Map<String, Value> {
    let mut c = base_config(cli, 0.0);
    c.insert("model".into(), display(path).into());
    c.insert("document".into(), document);
    c
}

pub fn validate(cli: &Cli, path: &Path) -> InputResult<Report> {
    let (abs, cfg, loaded) = read_model(path)?;
    let model = &loaded.model;
    let mut report = Report::new("model validate", model_config(cli, &abs, serde_json::to_value(&cfg).unwrap()));
    let mut faces = Table::with_columns("faces.csv", &["face", "dim", "vertices", "chart_volume"]);
    for (k, f) in model.faces().iter().enumerate() {
        faces.push(vec![k.to_string(), f.dim().to_string(), join_ids(f.index_set()), rational(&model.chart_volume(k))]);
    }
    let consistency = loaded.table.check_consistency(model);
    let mut violations = Table::with_columns("violations.csv", &["relation", "sum"]);
    for (m, sum) in &consistency.violations {
        violations.push(vec![m.to_string(), rational(sum)]);
    }
    report.pass = consistency.is_consistent();
    report.note("faces", model.faces().len());
    report.note("divisors", model.divisors().len());
    report.note("table_entries", loaded.table.len());
    report.note("relations_checked", consistency.checked);
    report.note("relations_unchecked", consistency.unchecked);
    report.note("violations", consistency.violations.len());
    report.message = format!(
        "model: {} divisors, {} faces; table: {} relations checked, {} violated",
        model.divisors().len(),
        model.faces().len(),
        consistency.checked,
        consistency.violations.len()
    );
    report.tables = vec![faces, violations];
    Ok(report)
}

pub fn skeleton(cli: &Cli, path: &Path) -> InputResult<Report> {
    let (abs, cfg, loaded) = read_model(path)?;
    let model = &loaded.model;
    let mut report = Report::new("model skeleton", model_config(cli, &abs, serde_json::to_value(&cfg).unwrap()));
    let sk = essential_skeleton(model);
    let measure = lebesgue_measure(model).ok();
    let mut table = Table::with_columns("skeleton.csv", &["face", "dim", "vertices", "chart_volume", "mass"]);
    for &k in &sk.faces {
        let f = model.face(k);
        let mass = match &measure {
            Some(mu) if mu.faces.contains(&k) => rational(&(model.chart_volume(k) * &mu.density)),
            Some(_) => "0".into(),
            None => String::new(),
        };
        table.push(vec![k.to_string(), f.dim().to_string(), join_ids(f.index_set()), rational(&model.chart_volume(k)), mass]);
    }
    report.note("dim", sk.dim.map(Value::from).unwrap_or(Value::Null));
    report.note("maximal", sk.maximal);
    match &measure {
        Some(mu) => {
            report.note("density", rational(&mu.density));
            report.note("total", rational(&mu.total));
        }
        None => {
            report.note("density", Value::Null);
            report.note("total", Value::Null);
        }
    }
    report.message = format!(
        "skeleton: {} faces, dimension {}, {}",
        sk.faces.len(),
        sk.dim.map_or("none".to_string(), |d| d.to_string()),
        if sk.maximal { "maximal" } else { "not maximal" }
    );
    report.tables = vec![table];
    Ok(report)
}

pub fn namma(cli: &Cli, path: &Path) -> InputResult<Report> {
    let (abs, cfg, loaded) = read_model(path)?;
    let model = &loaded.model;
    let mut report = Report::new("namma", model_config(cli, &abs, serde_json::to_value(&cfg).unwrap()));
    let c = loaded.bundle.clone().unwrap_or_else(|| vec![int(0); model.divisors().len()]);
    let mut table = Table::with_columns("masses.csv", &["divisor", "face", "x", "mass"]);
    match na_ma_model_metric(model, &loaded.table, &c) {
        Ok(mu) => {
            let mut negative = Vec::new();
            for (d, atom) in model.divisors().iter().zip(&mu.atoms) {
                if atom.mass < int(0) {
                    negative.push(Value::from(d.id));
                }
                table.push(vec![d.id.to_string(), atom.face.to_string(), rational(&atom.point[0]), rational(&atom.mass)]);
            }
            let total = mu.total();
            report.note("total", rational(&total));
            report.note("expected", rational(&total));
            report.note("negative", Value::Array(negative.clone()));
            report.message = format!("namma: total mass {} over {} atoms", rational(&total), mu.atoms.len());
            if !negative.is_empty() {
                report.message.push_str(&format!(", {} negative", negative.len()));
            }
        }
        Err(NaError::MassMismatch { computed, expected }) => {
            report.pass = false;
            report.note("total", rational(&computed));
            report.note("expected", rational(&expected));
            report.message =
                format!("namma: total mass {} differs from (L^n) = {}", rational(&computed), rational(&expected));
        }
        Err(e) => return Err(format!("{}: {e}", abs.display())),
    }
    report.tables = vec![table];
    Ok(report)
}
