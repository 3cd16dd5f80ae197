//! JSON model documents.
//!
//! ```json
//! {
//!   "n": 1,
//!   "semistable": true,
//!   "divisors": [{"id": 0, "b": 1, "a": "0", "degrees": "2"}, {"id": 1, "b": 1, "a": "0"}],
//!   "faces": [[0], [1], [0, 1]],
//!   "intersection_table": [
//!     {"L_power": 1, "divisor_powers": {}, "stratum": [1], "value": "1"},
//!     {"L_power": 1, "stratum": [], "value": "3"}
//!   ],
//!   "bundle": ["0", "1/2"],
//!   "sections": {"m": 1, "list": [{"support": [[0, 0]], "norm_exp": "0"}]},
//!   "residues": [{"face": [0, 1], "value": 1.0}]
//! }
//! ```
//!
//! Rationals are `"p"` or `"p/q"` strings. `degrees` on a divisor is shorthand
//! for the entry `(L^n . E_i)`. The entry with empty stratum is `(L^n)`.
//! Unknown fields are rejected everywhere.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::comparison::{ComparisonError, ResidueData};
use crate::na_potential::{IntersectionTable, Monomial, Section, TableError};
use crate::scalar::{parse_rational, ParseRationalError, Rational};
use crate::skeleton::{build_model, Divisor, ModelError, SncModel};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse model document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Rational(#[from] ParseRationalError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Residue(#[from] ComparisonError),
    #[error("bundle has {got} coefficients for {expected} divisors")]
    BundleLength { expected: usize, got: usize },
    #[error("section {index} has an exponent vector of length {got}, expected {expected}")]
    SectionLength { index: usize, expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivisorConfig {
    pub id: usize,
    pub b: u32,
    pub a: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degrees: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableEntryConfig {
    #[serde(rename = "L_power")]
    pub l_power: usize,
    #[serde(default)]
    pub divisor_powers: BTreeMap<usize, usize>,
    pub stratum: Vec<usize>,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionConfig {
    pub support: Vec<Vec<u32>>,
    pub norm_exp: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionsConfig {
    pub m: u32,
    pub list: Vec<SectionConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidueConfig {
    pub face: Vec<usize>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub semistable: bool,
    pub divisors: Vec<DivisorConfig>,
    pub faces: Vec<Vec<usize>>,
    #[serde(default)]
    pub intersection_table: Vec<TableEntryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sections: Option<SectionsConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residues: Vec<ResidueConfig>,
}

/// A validated model document.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: SncModel,
    pub table: IntersectionTable,
    pub bundle: Option<Vec<Rational>>,
    pub sections: Option<(u32, Vec<Section>)>,
    pub residues: Option<ResidueData<f64>>,
}

impl ModelConfig {
    pub fn parse(text: &str) -> Result<ModelConfig, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(&self) -> Result<LoadedModel, ConfigError> {
        let mut divisors = Vec::with_capacity(self.divisors.len());
        for d in &self.divisors {
            divisors.push(Divisor::new(d.id, d.b, parse_rational(&d.a)?));
        }
        let model = build_model(divisors, self.faces.clone(), self.n, self.semistable)?;
        let mut table = IntersectionTable::new(self.n);
        for d in &self.divisors {
            if let Some(v) = &d.degrees {
                table.insert(Monomial::new(self.n, [], &[d.id]), parse_rational(v)?)?;
            }
        }
        for e in &self.intersection_table {
            let m = Monomial::new(e.l_power, e.divisor_powers.iter().map(|(&i, &k)| (i, k)), &e.stratum);
            table.insert(m, parse_rational(&e.value)?)?;
        }
        table.validate_against(&model)?;
        let count = model.divisors().len();
        let bundle = match &self.bundle {
            Some(c) if c.len() != count => return Err(ConfigError::BundleLength { expected: count, got: c.len() }),
            Some(c) => Some(c.iter().map(|v| parse_rational(v)).collect::<Result<Vec<_>, _>>()?),
            None => None,
        };
        let sections = match &self.sections {
            Some(s) => {
                let mut list = Vec::with_capacity(s.list.len());
                for (index, sec) in s.list.iter().enumerate() {
                    if let Some(e) = sec.support.iter().find(|e| e.len() != count) {
                        return Err(ConfigError::SectionLength { index, expected: count, got: e.len() });
                    }
                    list.push(Section { support: sec.support.clone(), norm_exp: parse_rational(&sec.norm_exp)? });
                }
                Some((s.m, list))
            }
            None => None,
        };
        let residues = if self.residues.is_empty() {
            None
        } else {
            let values = self.residues.iter().map(|r| (r.face.clone(), r.value)).collect();
            Some(ResidueData::new(&model, values)?)
        };
        Ok(LoadedModel { model, table, bundle, sections, residues })
    }
}

/// The `I_N` cycle with degrees `d` and bundle `c`, as a document.
pub fn cycle_config(d: &[Rational], c: Option<&[Rational]>) -> ModelConfig {
    let len = d.len();
    let fmt = crate::scalar::format_rational;
    let mut faces: Vec<Vec<usize>> = (0..len).map(|i| vec![i]).collect();
    faces.extend((0..len).map(|i| {
        let j = (i + 1) % len;
        vec![i.min(j), i.max(j)]
    }));
    let table = IntersectionTable::cycle(d);
    let intersection_table = table
        .entries()
        .map(|(m, v)| TableEntryConfig {
            l_power: m.l_power,
            divisor_powers: m.divisor_powers.clone(),
            stratum: m.stratum.clone(),
            value: fmt(v),
        })
        .collect();
    ModelConfig {
        n: 1,
        semistable: true,
        divisors: (0..len).map(|id| DivisorConfig { id, b: 1, a: "0".into(), degrees: None }).collect(),
        faces,
        intersection_table,
        bundle: c.map(|c| c.iter().map(fmt).collect()),
        sections: None,
        residues: Vec::new(),
    }
}
