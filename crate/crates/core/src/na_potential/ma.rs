use std::collections::BTreeMap;

use crate::measure::{Atom, AtomicMeasure};
use crate::scalar::{int, Rational};
use crate::skeleton::SncModel;

use super::{IntersectionTable, NaError};

/// `sum_i b_i (L'^n . E_i) delta_{q_i}` for `L' = L + sum_j c_j E_j`.
///
/// The total is compared with `(L^n)`; a discrepancy means the table is not
/// internally consistent.
pub fn na_ma_model_metric(
    model: &SncModel,
    table: &IntersectionTable,
    c: &[Rational],
) -> Result<AtomicMeasure<Rational>, NaError> {
    if c.len() != model.divisors().len() {
        return Err(NaError::CoefficientCount { expected: model.divisors().len(), got: c.len() });
    }
    let n = model.dimension();
    let coeffs: BTreeMap<usize, Rational> = c.iter().cloned().enumerate().collect();
    let mut atoms = Vec::with_capacity(c.len());
    for d in model.divisors() {
        let pairing = table.pairing(model, &[d.id], n, &int(1), &coeffs)?;
        atoms.push(Atom {
            face: model.vertex_face(d.id),
            point: model.vertex_point(d.id),
            mass: pairing * int(d.multiplicity as i64),
        });
    }
    let measure = AtomicMeasure { atoms };
    let expected = table.top_power()?;
    let computed = measure.total();
    if computed != expected {
        return Err(NaError::MassMismatch { computed, expected });
    }
    Ok(measure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::na_potential::Monomial;
    use crate::skeleton::{build_model, Divisor};

    #[test]
    fn trivial_bundle_gives_degrees() {
        let model = build_model(
            vec![Divisor::reduced(0), Divisor::new(1, 2, int(0))],
            vec![vec![0], vec![1], vec![0, 1]],
            1,
            false,
        )
        .unwrap();
        let mut t = IntersectionTable::new(1);
        t.insert(Monomial::new(1, [], &[0]), int(2)).unwrap();
        t.insert(Monomial::new(1, [], &[1]), int(1)).unwrap();
        t.insert(Monomial::top(1), int(4)).unwrap();
        let mu = na_ma_model_metric(&model, &t, &[int(0), int(0)]).unwrap();
        assert_eq!(mu.masses(), vec![int(2), int(2)]);
        assert_eq!(mu.total(), int(4));
    }

    #[test]
    fn cycle_masses_are_discrete_laplacian() {
        let d = [int(1), int(0), int(2), int(1), int(0), int(3)];
        let c = [int(2), int(-1), int(0), int(5), int(1), int(-3)];
        let model = SncModel::cycle(d.len()).unwrap();
        let t = IntersectionTable::cycle(&d);
        let mu = na_ma_model_metric(&model, &t, &c).unwrap();
        let len = d.len();
        for i in 0..len {
            let expected = &d[i] + &c[(i + len - 1) % len] - int(2) * &c[i] + &c[(i + 1) % len];
            assert_eq!(mu.atoms[i].mass, expected);
        }
        assert_eq!(mu.total(), d.iter().sum::<Rational>());
        let flat = na_ma_model_metric(&model, &t, &vec![int(7); 6]).unwrap();
        assert_eq!(flat.masses(), d.to_vec());
    }

    #[test]
    fn missing_entries_and_mismatch() {
        let model = SncModel::cycle(3).unwrap();
        let t = IntersectionTable::new(1);
        assert!(matches!(
            na_ma_model_metric(&model, &t, &[int(0), int(0), int(0)]),
            Err(NaError::Table(_))
        ));
        let mut bad = IntersectionTable::cycle(&[int(1), int(1), int(1)]);
        bad = {
            let mut fixed = IntersectionTable::new(1);
            for (m, v) in bad.entries() {
                let v = if *m == Monomial::top(1) { int(5) } else { v.clone() };
                fixed.insert(m.clone(), v).unwrap();
            }
            fixed
        };
        assert!(matches!(
            na_ma_model_metric(&model, &bad, &[int(0), int(0), int(0)]),
            Err(NaError::MassMismatch { .. })
        ));
    }
}
