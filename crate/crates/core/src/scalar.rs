//! Number types shared by the exact (rational) and floating-point code paths.
//!
//! Combinatorial masses, chart constraints and intersection pairings are
//! carried in [`Rational`]. Geometry kernels that must run in both modes are
//! written against [`Scalar`], which is implemented for `f64` and `Rational`.

use std::fmt::Debug;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational number.
pub type Rational = num_rational::BigRational;

/// Field operations plus the small amount of extra structure the geometry
/// kernels need.
pub trait Scalar:
    Clone
    + Debug
    + PartialOrd
    + Signed
    + FromPrimitive
    + Send
    + Sync
    + for<'a> std::ops::Add<&'a Self, Output = Self>
    + for<'a> std::ops::Sub<&'a Self, Output = Self>
    + for<'a> std::ops::Mul<&'a Self, Output = Self>
    + for<'a> std::ops::Div<&'a Self, Output = Self>
{
    /// `true` when arithmetic is exact and sign tests need no slack.
    const EXACT: bool;

    fn from_rational(q: &Rational) -> Self;

    fn as_f64(&self) -> f64;

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer fits in scalar")
    }

    /// Absolute slack used in sign tests against quantities of magnitude
    /// `scale`. Zero for exact types.
    fn slack(scale: &Self) -> Self;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }

    fn as_f64(&self) -> f64 {
        *self
    }

    fn slack(scale: &Self) -> Self {
        1e-12 * scale.abs().max(1.0)
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn as_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn slack(_scale: &Self) -> Self {
        Rational::zero()
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => ToPrimitive::to_f64(q).unwrap_or(f64::NAN),
    }
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// Exact rational from a finite `f64` (binary expansion, no rounding).
pub fn rational_from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational {0:?}: expected \"p\" or \"p/q\" with q != 0")]
pub struct ParseRationalError(pub String);

/// Parses `"p"` or `"p/q"` (surrounding whitespace allowed).
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n = BigInt::from_str(num).map_err(|_| err())?;
    let d = BigInt::from_str(den).map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(n, d))
}

/// Canonical `"p/q"` form; integers are written as `"p"`.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Multinomial coefficient `total! / prod(parts!)`; `parts` must sum to `total`.
pub fn multinomial(total: usize, parts: &[usize]) -> BigInt {
    debug_assert_eq!(parts.iter().sum::<usize>(), total);
    let mut acc = BigInt::one();
    let mut used = 0usize;
    for &k in parts {
        for j in 1..=k {
            acc = acc * BigInt::from(used + j) / BigInt::from(j);
        }
        used += k;
    }
    acc
}

pub fn pow<S: Scalar>(base: &S, exp: usize) -> S {
    let mut acc = S::one();
    for _ in 0..exp {
        acc = acc * base;
    }
    acc
}

pub fn max_abs_f64(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Determinant by Gaussian elimination with partial pivoting (largest
/// magnitude first), exact for rationals. The empty matrix has determinant 1.
pub fn determinant<S: Scalar>(mut m: Vec<Vec<S>>) -> S {
    let n = m.len();
    let mut det = S::one();
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        if m[pivot][col].is_zero() {
            return S::zero();
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det = det * &m[col][col];
        for row in col + 1..n {
            let f = m[row][col].clone() / &m[col][col];
            for k in col..n {
                let v = f.clone() * &m[col][k];
                m[row][k] = m[row][k].clone() - &v;
            }
        }
    }
    det
}
