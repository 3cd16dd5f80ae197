use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

/// A polynomial `sum_k c_k z^{alpha_k}` in complex variables `z0, z1, ..`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<(Complex64, Vec<u32>)>,
}

impl Polynomial {
    pub fn one() -> Polynomial {
        Polynomial { terms: vec![(Complex64::new(1.0, 0.0), Vec::new())] }
    }

    /// One more than the largest variable index used.
    pub fn variables(&self) -> usize {
        self.terms
            .iter()
            .filter_map(|(_, e)| e.iter().rposition(|&k| k > 0))
            .map(|i| i + 1)
            .max()
            .unwrap_or(0)
    }

    pub fn evaluate(&self, z: &[Complex64]) -> Complex64 {
        self.terms.iter().fold(Complex64::new(0.0, 0.0), |acc, (c, e)| {
            let mut v = *c;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    v *= z[i].powu(k);
                }
            }
            acc + v
        })
    }

    /// Value at `z = 0`.
    pub fn constant(&self) -> Complex64 {
        self.terms.iter().filter(|(_, e)| e.iter().all(|&k| k == 0)).map(|(c, _)| *c).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse polynomial term {term:?}: {reason}")]
pub struct PolynomialParseError {
    pub term: String,
    pub reason: &'static str,
}

/// Parses sums of terms like `1`, `-2.5*z0^2*z1`, `3i*z2`, `z0z1`.
impl FromStr for Polynomial {
    type Err = PolynomialParseError;

    fn from_str(s: &str) -> Result<Polynomial, PolynomialParseError> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(PolynomialParseError { term: String::new(), reason: "empty input" });
        }
        let mut terms = Vec::new();
        let mut start = 0;
        let bytes = compact.as_bytes();
        for k in 1..=bytes.len() {
            let split = k == bytes.len() || ((bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E' | b'^'));
            if split {
                terms.push(parse_term(&compact[start..k])?);
                start = k;
            }
        }
        Ok(Polynomial { terms })
    }
}

fn parse_term(raw: &str) -> Result<(Complex64, Vec<u32>), PolynomialParseError> {
    let err = |reason| PolynomialParseError { term: raw.to_string(), reason };
    let (sign, body) = match raw.as_bytes().first() {
        Some(b'-') => (-1.0, &raw[1..]),
        Some(b'+') => (1.0, &raw[1..]),
        _ => (1.0, raw),
    };
    if body.is_empty() {
        return Err(err("empty term"));
    }
    let split = body.find('z').unwrap_or(body.len());
    let coef_text = body[..split].trim_end_matches('*');
    let coef = if coef_text.is_empty() {
        Complex64::new(1.0, 0.0)
    } else if let Some(im) = coef_text.strip_suffix('i') {
        let v = if im.is_empty() { 1.0 } else { im.parse::<f64>().map_err(|_| err("bad coefficient"))? };
        Complex64::new(0.0, v)
    } else {
        Complex64::new(coef_text.parse::<f64>().map_err(|_| err("bad coefficient"))?, 0.0)
    };
    let mut exps: Vec<u32> = Vec::new();
    for factor in body[split..].split(['*', 'z']).filter(|f| !f.is_empty()) {
        let (var, pow) = match factor.split_once('^') {
            Some((v, p)) => (v, p.parse::<u32>().map_err(|_| err("bad exponent"))?),
            None => (factor, 1),
        };
        let var: usize = var.parse().map_err(|_| err("bad variable index"))?;
        if exps.len() <= var {
            exps.resize(var + 1, 0);
        }
        exps[var] += pow;
    }
    Ok((coef * sign, exps))
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (c, e) in &self.terms {
            for (v, unit) in [(c.re, ""), (c.im, "i")] {
                if v == 0.0 && !(unit.is_empty() && c.im == 0.0) {
                    continue;
                }
                match (first, v < 0.0) {
                    (true, _) => write!(f, "{v}{unit}")?,
                    (false, true) => write!(f, " - {}{unit}", -v)?,
                    (false, false) => write!(f, " + {v}{unit}")?,
                }
                first = false;
                for (i, &p) in e.iter().enumerate() {
                    match p {
                        0 => {}
                        1 => write!(f, "*z{i}")?,
                        _ => write!(f, "*z{i}^{p}")?,
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_evaluates() {
        let p: Polynomial = "1 + z0 - 2.5*z1^2 + 3i z0z2".parse().unwrap();
        assert_eq!(p.variables(), 3);
        let z = [Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        assert_eq!(p.evaluate(&z), Complex64::new(1.0 + 2.0 - 2.5 - 6.0, 0.0));
        assert_eq!(p.constant(), Complex64::new(1.0, 0.0));
        let round: Polynomial = p.to_string().parse().unwrap();
        assert_eq!(round.evaluate(&z), p.evaluate(&z));
    }

    #[test]
    fn scientific_coefficients() {
        let p: Polynomial = "1e-3*z1 + 2".parse().unwrap();
        assert_eq!(p.terms.len(), 2);
        assert_eq!(p.terms[0].0.re, 1e-3);
    }

    #[test]
    fn rejects_garbage() {
        assert!("1 + y0".parse::<Polynomial>().is_err());
        assert!("".parse::<Polynomial>().is_err());
        assert!("z0^x".parse::<Polynomial>().is_err());
    }
}
