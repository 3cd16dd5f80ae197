use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nama::comparison::{
    gradient_matching_residual, lower_face_density, na_pde_residual, total_mass_check, vilsmeier_check_1d, wall_pairing,
    FnChart, MassLedger, Quadratic, TransitionMap,
};
use nama::config::{LoadedModel, ModelConfig};
use nama::na_potential::{na_ma_model_metric, Monomial, NaError};
use nama::scalar::{int, rational_from_f64, Rational, Scalar};
use nama::skeleton::SncModel;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{base_config, tolerance};
use crate::input::{display, load_model, rational_matrix, rationals, read_text, InputResult};
use crate::output::{coord_columns, float, rational, Report, Table};
use crate::{Cli, CompareMode};

/// A quadratic `x^t A x / 2 + b . x + c`; entries are rational strings.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadraticDoc {
    a: Vec<Vec<String>>,
    b: Vec<String>,
    #[serde(default = "zero_string")]
    c: String,
}

fn zero_string() -> String {
    "0".into()
}

/// A quadratic on the reduced chart of a face, plus the gradients of the
/// divisors that meet the stratum without being vertices of the face.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PotentialDoc {
    hessian: Vec<Vec<String>>,
    linear: Vec<String>,
    #[serde(default)]
    normal_gradients: BTreeMap<usize, String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomDoc {
    divisor: usize,
    mass: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegralDoc {
    face: Vec<usize>,
    value: String,
}

/// Comparison document. A bare model document is accepted as well and is
/// read as `{"model": <document>}`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareDoc {
    /// Path of a model document, relative to this file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    face: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    potential: Option<PotentialDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    points: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transition: Option<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    left: Option<QuadraticDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    right: Option<QuadraticDoc>,
    /// Added to the right normal derivative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kink: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    atoms: Vec<AtomDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    integrals: Vec<IntegralDoc>,
}

struct Input {
    doc: CompareDoc,
    model: Option<(PathBuf, ModelConfig, LoadedModel)>,
}

impl Input {
    fn model(&self) -> InputResult<&(PathBuf, ModelConfig, LoadedModel)> {
        self.model.as_ref().ok_or_else(|| "this mode needs a model document".to_string())
    }
}

fn read_input(path: &Path) -> InputResult<(PathBuf, Input)> {
    let (abs, text) = read_text(path)?;
    if let Ok(cfg) = ModelConfig::parse(&text) {
        let loaded = load_model(&abs, &cfg)?;
        return Ok((abs.clone(), Input { doc: CompareDoc::default(), model: Some((abs, cfg, loaded)) }));
    }
    let doc: CompareDoc = serde_json::from_str(&text)
        .map_err(|e| format!("{}: neither a model document nor a comparison document: {e}", abs.display()))?;
    let model = match &doc.model {
        Some(rel) => {
            let base = abs.parent().unwrap_or(Path::new("."));
            Some(crate::input::read_model(&base.join(rel))?)
        }
        None => None,
    };
    Ok((abs, Input { doc, model }))
}

pub fn run(cli: &Cli, mode: CompareMode, path: &Path) -> InputResult<Report> {
    let (abs, input) = read_input(path)?;
    let default_tol = match mode {
        CompareMode::Vilsmeier | CompareMode::Mass | CompareMode::Lowerface => 0.0,
        CompareMode::Pde => 1e-9,
        CompareMode::Matching => 1e-12,
    };
    let tol = tolerance(cli, default_tol)?;
    let mut config = base_config(cli, tol);
    config.insert("mode".into(), format!("{mode:?}").to_lowercase().into());
    config.insert("config".into(), display(&abs).into());
    config.insert("document".into(), serde_json::to_value(&input.doc).unwrap());
    if let Some((p, cfg, _)) = &input.model {
        config.insert("model".into(), display(p).into());
        config.insert("model_document".into(), serde_json::to_value(cfg).unwrap());
    }
    let command = format!("compare {}", format!("{mode:?}").to_lowercase());
    let mut report = Report::new(&command, config);
    match mode {
        CompareMode::Vilsmeier => vilsmeier(&input, &mut report)?,
        CompareMode::Mass => mass(&input, tol, &mut report)?,
        CompareMode::Lowerface => lowerface(&input, &mut report)?,
        CompareMode::Pde => pde(&input, tol, &mut report)?,
        CompareMode::Matching => matching(&input, tol, &mut report)?,
    }
    Ok(report)
}

fn report_header(extra: &[&str], dim: usize) -> Vec<String> {
    let mut h = vec!["face".to_string()];
    h.extend(coord_columns("x", dim));
    h.extend(extra.iter().map(|s| s.to_string()));
    h
}

fn is_cycle(model: &SncModel) -> bool {
    let len = model.divisors().len();
    model.dimension() == 1
        && len >= 3
        && SncModel::cycle(len).is_ok_and(|c| c.faces() == model.faces() && c.divisors() == model.divisors())
}

fn vilsmeier(input: &Input, report: &mut Report) -> InputResult<()> {
    let (_, _, loaded) = input.model()?;
    let model = &loaded.model;
    if !is_cycle(model) {
        return Err("the vilsmeier comparison needs an I_N cycle model with N >= 3".into());
    }
    let table = &loaded.table;
    let len = model.divisors().len();
    let d = (0..len)
        .map(|i| table.value(model, &Monomial::new(1, [], &[i])))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let c = loaded.bundle.clone().unwrap_or_else(|| vec![int(0); len]);
    let top = table.top_power().map_err(|e| e.to_string())?;
    let r = vilsmeier_check_1d(&d, &c, &top).map_err(|e| e.to_string())?;
    let mut out = Table::new("report.csv", report_header(&["lhs", "rhs", "residual"], 1));
    for i in 0..len {
        out.push(vec![
            model.vertex_face(i).to_string(),
            rational(&model.vertex_point(i)[0]),
            rational(&r.na_masses[i]),
            rational(&r.real_masses[i]),
            rational(&(&r.na_masses[i] - &r.real_masses[i])),
        ]);
    }
    report.pass = r.holds();
    report.note("max_residual", rational(&r.max_discrepancy));
    report.note("negative", r.negative.clone());
    report.message = format!(
        "compare vilsmeier: {len} vertices, max residual {}{}",
        rational(&r.max_discrepancy),
        if r.negative.is_empty() { String::new() } else { format!(", {} negative masses", r.negative.len()) }
    );
    report.tables = vec![out];
    Ok(())
}

fn mass(input: &Input, tol: f64, report: &mut Report) -> InputResult<()> {
    let (_, _, loaded) = input.model()?;
    let model = &loaded.model;
    let top = loaded.table.top_power().map_err(|e| e.to_string())?;
    let mut ledger = MassLedger { atoms: Vec::new(), integrals: Vec::new() };
    if input.doc.atoms.is_empty() {
        let c = loaded.bundle.clone().unwrap_or_else(|| vec![int(0); model.divisors().len()]);
        match na_ma_model_metric(model, &loaded.table, &c) {
            Ok(mu) => ledger.atoms = mu.atoms.into_iter().map(|a| (a.face, a.mass)).collect(),
            Err(NaError::MassMismatch { computed, .. }) => ledger.atoms.push((usize::MAX, computed)),
            Err(e) => return Err(e.to_string()),
        }
    } else {
        for a in &input.doc.atoms {
            if a.divisor >= model.divisors().len() {
                return Err(format!("atom on unknown divisor {}", a.divisor));
            }
            ledger.atoms.push((model.vertex_face(a.divisor), rationals(std::slice::from_ref(&a.mass))?.remove(0)));
        }
    }
    for i in &input.doc.integrals {
        let mut set = i.face.clone();
        set.sort_unstable();
        let k = model.face_index(&set).ok_or_else(|| format!("{:?} is not a face", i.face))?;
        ledger.integrals.push((k, rationals(std::slice::from_ref(&i.value))?.remove(0)));
    }
    let tol_q = rational_from_f64(tol).ok_or("tolerance is not representable")?;
    let verdict = total_mass_check(&ledger, &top, &tol_q);
    let mut out = Table::with_columns("report.csv", &["face", "kind", "mass"]);
    let face_label = |k: usize| if k == usize::MAX { "all".to_string() } else { k.to_string() };
    for (k, m) in &ledger.atoms {
        out.push(vec![face_label(*k), "atom".into(), rational(m)]);
    }
    for (k, m) in &ledger.integrals {
        out.push(vec![face_label(*k), "integral".into(), rational(m)]);
    }
    report.pass = verdict.pass;
    report.note("total", rational(&verdict.total));
    report.note("expected", rational(&verdict.expected));
    report.note("excess", rational(&verdict.excess));
    report.message = format!(
        "compare mass: total {} against (L^n) = {}, excess {}",
        rational(&verdict.total),
        rational(&verdict.expected),
        rational(&verdict.excess)
    );
    report.tables = vec![out];
    Ok(())
}

struct FacePotential<S> {
    face: usize,
    set: Vec<usize>,
    hessian: Vec<Vec<S>>,
    linear: Vec<S>,
    normal: BTreeMap<usize, S>,
    points: Vec<Vec<S>>,
}

impl<S: Scalar> FacePotential<S> {
    fn read(input: &Input) -> InputResult<FacePotential<S>> {
        let (_, _, loaded) = input.model()?;
        let model = &loaded.model;
        let mut set = input.doc.face.clone().ok_or("missing `face`")?;
        set.sort_unstable();
        let face = model.face_index(&set).ok_or_else(|| format!("{set:?} is not a face"))?;
        let p = model.face(face).dim();
        let pot = input.doc.potential.as_ref().ok_or("missing `potential`")?;
        let conv = |v: Vec<Rational>| v.iter().map(S::from_rational).collect::<Vec<S>>();
        let hessian: Vec<Vec<S>> = rational_matrix(&pot.hessian)?.into_iter().map(conv).collect();
        let linear = conv(rationals(&pot.linear)?);
        if hessian.len() != p || hessian.iter().any(|r| r.len() != p) || linear.len() != p {
            return Err(format!("face {set:?} has {p} reduced coordinates; the potential does not match"));
        }
        let mut normal = BTreeMap::new();
        for (i, v) in &pot.normal_gradients {
            normal.insert(*i, S::from_rational(&rationals(std::slice::from_ref(v))?[0]));
        }
        let mut points = Vec::with_capacity(input.doc.points.len());
        for x in &input.doc.points {
            let q = rationals(x)?;
            if q.len() != p {
                return Err(format!("point {x:?} should have {p} reduced coordinates"));
            }
            model.check_chart_point(face, &model.lift(face, &q)).map_err(|e| format!("point {x:?}: {e}"))?;
            points.push(conv(q));
        }
        if points.is_empty() {
            return Err("no `points` given".into());
        }
        Ok(FacePotential { face, set, hessian, linear, normal, points })
    }

    fn gradients(&self, x: &[S]) -> BTreeMap<usize, S> {
        let mut g = self.normal.clone();
        g.insert(self.set[0], S::zero());
        for (k, &i) in self.set[1..].iter().enumerate() {
            let v = x.iter().zip(&self.hessian[k]).fold(self.linear[k].clone(), |acc, (xj, a)| acc + &(a.clone() * xj));
            g.insert(i, v);
        }
        g
    }

    fn chart(&self) -> FnChart<impl Fn(&[S]) -> Vec<Vec<S>> + '_, impl Fn(&[S]) -> BTreeMap<usize, S> + '_> {
        FnChart { dim: self.linear.len(), hessian: move |_: &[S]| self.hessian.clone(), gradients: move |x: &[S]| self.gradients(x) }
    }
}

fn lowerface(input: &Input, report: &mut Report) -> InputResult<()> {
    let (_, _, loaded) = input.model()?;
    let fp = FacePotential::<Rational>::read(input)?;
    let chart = fp.chart();
    let p = fp.linear.len();
    let mut out = Table::new("report.csv", report_header(&["det", "pairing", "density"], p));
    let mut negative = 0usize;
    for x in &fp.points {
        let d = lower_face_density(&loaded.model, &loaded.table, loaded.bundle.as_deref(), fp.face, &chart, x)
            .map_err(|e| e.to_string())?;
        if d.density < int(0) {
            negative += 1;
        }
        let mut row = vec![fp.face.to_string()];
        row.extend(x.iter().map(rational));
        row.extend([rational(&d.det), rational(&d.pairing), rational(&d.density)]);
        out.push(row);
    }
    report.pass = negative == 0;
    report.note("points", fp.points.len());
    report.note("negative", negative);
    report.message = format!("compare lowerface: {} points on face {:?}, {negative} negative densities", fp.points.len(), fp.set);
    report.tables = vec![out];
    Ok(())
}

fn pde(input: &Input, tol: f64, report: &mut Report) -> InputResult<()> {
    let (_, _, loaded) = input.model()?;
    let residues = loaded.residues.as_ref().ok_or("the model document has no `residues`")?;
    let fp = FacePotential::<f64>::read(input)?;
    let chart = fp.chart();
    let p = fp.linear.len();
    let mut out = Table::new("report.csv", report_header(&["lhs", "rhs", "residual"], p));
    let mut worst: f64 = 0.0;
    for x in &fp.points {
        let r = na_pde_residual(&loaded.model, &loaded.table, loaded.bundle.as_deref(), fp.face, &chart, residues, x)
            .map_err(|e| e.to_string())?;
        worst = worst.max(r.residual.abs());
        let mut row = vec![fp.face.to_string()];
        row.extend(x.iter().map(|v| float(*v)));
        row.extend([float(r.lhs), float(r.rhs), float(r.residual)]);
        out.push(row);
    }
    report.pass = worst <= tol;
    report.note("max_residual", worst);
    report.message = format!("compare pde: {} points on face {:?}, max residual {worst:e}", fp.points.len(), fp.set);
    report.tables = vec![out];
    Ok(())
}

fn quadratic(doc: &QuadraticDoc, n: usize, side: &str) -> InputResult<Quadratic<Rational>> {
    let a = rational_matrix(&doc.a)?;
    let b = rationals(&doc.b)?;
    let c = rationals(std::slice::from_ref(&doc.c))?.remove(0);
    if a.len() != n || a.iter().any(|r| r.len() != n) || b.len() != n {
        return Err(format!("{side} quadratic must have dimension {n}"));
    }
    if (0..n).any(|i| (0..n).any(|j| a[i][j] != a[j][i])) {
        return Err(format!("{side} quadratic has a non-symmetric matrix"));
    }
    Ok(Quadratic { a, b, c })
}

fn matching(input: &Input, tol: f64, report: &mut Report) -> InputResult<()> {
    let doc = &input.doc;
    let d = doc.transition.clone().ok_or("missing `transition`")?;
    let t = TransitionMap::new(d.clone());
    let n = t.dim();
    let left = quadratic(doc.left.as_ref().ok_or("missing `left`")?, n, "left")?;
    let right = match &doc.right {
        Some(q) => quadratic(q, n, "right")?,
        None => left.compose_linear(&t.matrix(), &vec![int(0); n]),
    };
    let kink = match &doc.kink {
        Some(k) => rationals(std::slice::from_ref(k))?.remove(0),
        None => int(0),
    };
    let right_grad = |y: &[Rational]| {
        let mut g = right.gradient(y);
        g[0] = &g[0] + &kink;
        g
    };
    let points: Vec<Vec<Rational>> = doc.points.iter().map(|x| rationals(x)).collect::<InputResult<_>>()?;
    if points.is_empty() {
        return Err("no `points` given".into());
    }
    let residuals = gradient_matching_residual(|x| left.gradient(x), right_grad, &t, &points).map_err(|e| e.to_string())?;
    let mut h = vec!["point".to_string()];
    h.extend(coord_columns("x", n));
    h.extend(["component", "lhs", "rhs", "residual"].map(String::from));
    let mut out = Table::new("report.csv", h);
    let dq: Vec<Rational> = d.iter().map(|&v| int(v)).collect();
    let mut pairings = Vec::new();
    let mut worst: f64 = 0.0;
    for (k, (x, r)) in points.iter().zip(&residuals).enumerate() {
        let gl = left.gradient(x);
        let gr = right_grad(&t.apply(x));
        pairings.push(Value::from(rational(&wall_pairing(&dq, &gl, &gr[0]))));
        for (c, res) in r.residuals.iter().enumerate() {
            let (lhs, rhs) = if c == 0 {
                let rhs = dq.iter().zip(&gl[1..]).fold(-gl[0].clone(), |acc, (di, gi)| acc + di * gi);
                (gr[0].clone(), rhs)
            } else {
                (gr[c].clone(), gl[c].clone())
            };
            worst = worst.max(res.as_f64().abs());
            let mut row = vec![k.to_string()];
            row.extend(x.iter().map(rational));
            row.extend([if c == 0 { "normal".to_string() } else { format!("tangential{c}") }, rational(&lhs), rational(&rhs), rational(res)]);
            out.push(row);
        }
    }
    report.pass = worst <= tol;
    report.note("max_residual", worst);
    report.note("wall_pairings", Value::Array(pairings));
    report.message = format!("compare matching: {} wall points, max residual {worst:e}", points.len());
    report.tables = vec![out];
    Ok(())
}
