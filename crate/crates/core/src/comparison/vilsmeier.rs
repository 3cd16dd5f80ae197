use num_traits::{Signed, Zero};

use crate::na_potential::{model_function, na_ma_model_metric, IntersectionTable};
use crate::real_ma::slope_jumps_1d;
use crate::scalar::{int, Rational};
use crate::skeleton::SncModel;

use super::ComparisonError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VilsmeierReport {
    pub na_masses: Vec<Rational>,
    /// Slope jumps of the model function plus the reference potential.
    pub real_masses: Vec<Rational>,
    pub max_discrepancy: Rational,
    /// Vertices carrying negative mass: the model metric is not semipositive.
    pub negative: Vec<usize>,
}

impl VilsmeierReport {
    pub fn holds(&self) -> bool {
        self.max_discrepancy.is_zero()
    }
}

/// Compares NA masses on the `I_N` cycle with the slope jumps of a potential
/// on the circle `Delta`.
///
/// The circle is unrolled at vertex 0. The potential on edge `[q_i, q_{i+1}]`
/// is the model function of `c` (slope `c_{i+1} - c_i`) plus a reference
/// potential of slope `sigma_i`, where `sigma_i - sigma_{i-1} = d_i` and
/// `sigma_0 = 0`. The reference is multivalued: going once around adds the
/// monodromy `(L)` to its slope, which is the jump at vertex 0.
pub fn vilsmeier_check_1d(d: &[Rational], c: &[Rational], l_total: &Rational) -> Result<VilsmeierReport, ComparisonError> {
    let len = d.len();
    if len < 3 {
        return Err(ComparisonError::CycleTooShort(len));
    }
    let sum: Rational = d.iter().sum();
    if &sum != l_total {
        return Err(ComparisonError::InconsistentDegrees { sum, expected: l_total.clone() });
    }
    let model = SncModel::cycle(len).expect("cycles of length >= 3 are valid");
    let table = IntersectionTable::cycle(d);
    let na = na_ma_model_metric(&model, &table, c)?.masses();

    let phi = model_function(&model, c)?;
    let mut sigma = vec![Rational::zero(); len];
    for i in 1..len {
        sigma[i] = &sigma[i - 1] + &d[i];
    }
    // Unrolled nodes t = 0, 1, .., N with q_N identified with q_0.
    let nodes: Vec<Rational> = (0..=len).map(|k| int(k as i64)).collect();
    let mut values = vec![Rational::zero(); len + 1];
    for i in 0..len {
        let edge = model.face_index(&sorted(i, (i + 1) % len)).expect("cycle edges exist");
        let at = |tail: Rational| {
            // Chart point of the edge with weight `tail` on q_{i+1}.
            let head = int(1) - &tail;
            if i < (i + 1) % len {
                vec![head, tail]
            } else {
                vec![tail, head]
            }
        };
        let start: Rational = phi.evaluate(edge, &at(int(0)));
        let end: Rational = phi.evaluate(edge, &at(int(1)));
        if i == 0 {
            values[0] = start.clone();
        }
        values[i + 1] = &values[i] + (end - start) + &sigma[i];
    }
    let mut real = vec![Rational::zero(); len];
    let inner = slope_jumps_1d(&nodes, &values);
    real[1..len].clone_from_slice(&inner);
    let first = &values[1] - &values[0];
    let last = &values[len] - &values[len - 1];
    real[0] = first - last + l_total.clone();

    let max_discrepancy = na
        .iter()
        .zip(&real)
        .map(|(a, b)| (a - b).abs())
        .fold(Rational::zero(), |m, v| if v > m { v } else { m });
    let negative = na.iter().enumerate().filter(|(_, m)| m.is_negative()).map(|(i, _)| i).collect();
    Ok(VilsmeierReport { na_masses: na, real_masses: real, max_discrepancy, negative })
}

fn sorted(a: usize, b: usize) -> Vec<usize> {
    if a < b {
        vec![a, b]
    } else {
        vec![b, a]
    }
}
