//! Reading documents and matrices. Every failure here is an input error.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use nalgebra::DMatrix;
use nama::config::{LoadedModel, ModelConfig};
use nama::scalar::{parse_rational, Rational};
use num_complex::Complex64;
use serde::de::DeserializeOwned;

pub type InputResult<T> = Result<T, String>;

pub fn resolve(path: &Path) -> InputResult<PathBuf> {
    path.canonicalize().map_err(|e| format!("{}: {e}", path.display()))
}

pub fn read_text(path: &Path) -> InputResult<(PathBuf, String)> {
    let abs = resolve(path)?;
    let text = std::fs::read_to_string(&abs).map_err(|e| format!("{}: {e}", abs.display()))?;
    Ok((abs, text))
}

pub fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> InputResult<T> {
    serde_json::from_str(text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn load_model(path: &Path, cfg: &ModelConfig) -> InputResult<LoadedModel> {
    cfg.load().map_err(|e| format!("{}: {e}", path.display()))
}

pub fn read_model(path: &Path) -> InputResult<(PathBuf, ModelConfig, LoadedModel)> {
    let (abs, text) = read_text(path)?;
    let cfg = ModelConfig::parse(&text).map_err(|e| format!("{}: {e}", abs.display()))?;
    let loaded = load_model(&abs, &cfg)?;
    Ok((abs, cfg, loaded))
}

pub fn rationals(values: &[String]) -> InputResult<Vec<Rational>> {
    values.iter().map(|v| parse_rational(v).map_err(|e| e.to_string())).collect()
}

pub fn rational_matrix(rows: &[Vec<String>]) -> InputResult<Vec<Vec<Rational>>> {
    rows.iter().map(|r| rationals(r)).collect()
}

fn records(path: &Path) -> InputResult<(PathBuf, Vec<csv::StringRecord>)> {
    let abs = resolve(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_path(&abs)
        .map_err(|e| format!("{}: {e}", abs.display()))?;
    let rows = reader.records().collect::<Result<Vec<_>, _>>().map_err(|e| format!("{}: {e}", abs.display()))?;
    Ok((abs, rows))
}

fn matrix<T: Clone + nalgebra::Scalar>(
    path: &Path,
    parse: impl Fn(&str) -> Option<T>,
) -> InputResult<(PathBuf, DMatrix<T>)> {
    let (abs, rows) = records(path)?;
    if rows.is_empty() {
        return Err(format!("{}: empty matrix", abs.display()));
    }
    let cols = rows[0].len();
    let mut data = Vec::with_capacity(rows.len() * cols);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(format!("{}: row {} has {} entries, expected {cols}", abs.display(), r + 1, row.len()));
        }
        for cell in row {
            data.push(parse(cell).ok_or_else(|| format!("{}: cannot parse {cell:?}", abs.display()))?);
        }
    }
    Ok((abs, DMatrix::from_row_slice(rows.len(), cols, &data)))
}

/// Plain numeric CSV without header.
pub fn real_matrix(path: &Path) -> InputResult<(PathBuf, DMatrix<f64>)> {
    matrix(path, |s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
}

/// Entries like `2`, `-1.5i` or `0.5+2i`.
pub fn complex_matrix(path: &Path) -> InputResult<(PathBuf, DMatrix<Complex64>)> {
    matrix(path, |s| Complex64::from_str(s).ok().filter(|z| z.re.is_finite() && z.im.is_finite()))
}

/// A CSV with a header row. Returns the header and the numeric rows.
pub fn numeric_table(path: &Path) -> InputResult<(PathBuf, Vec<String>, Vec<Vec<f64>>)> {
    let (abs, mut rows) = records(path)?;
    if rows.is_empty() {
        return Err(format!("{}: missing header", abs.display()));
    }
    let header: Vec<String> = rows.remove(0).iter().map(str::to_string).collect();
    let mut out = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        if row.len() != header.len() {
            return Err(format!("{}: row {} has {} entries, expected {}", abs.display(), r + 2, row.len(), header.len()));
        }
        let values = row
            .iter()
            .map(|c| c.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| format!("{}: non-numeric entry in row {}", abs.display(), r + 2))?;
        out.push(values);
    }
    Ok((abs, header, out))
}

pub fn display(path: &Path) -> String {
    path.display().to_string()
}
