use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::scalar::{int, Rational, Scalar};
use crate::skeleton::SncModel;

use super::{IntersectionTable, Monomial, NaError};

/// The class `c_1(L) + sum_i (c_i - g_i) c_1(O(E_i))` restricted to `E_J`,
/// where `c` is the model bundle and `g_i = du/dx_i` at the chosen point.
#[derive(Debug, Clone, PartialEq)]
pub struct DjClass<S> {
    pub stratum: Vec<usize>,
    pub base: S,
    /// Only divisors meeting `E_J`; the others restrict to zero.
    pub coefficients: BTreeMap<usize, S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DjPairing<S> {
    pub class: DjClass<S>,
    /// `D_J^{n-p} . E_J` with `p = |J| - 1`.
    pub pairing: S,
}

impl<S: Scalar> DjClass<S> {
    pub fn new(
        model: &SncModel,
        bundle: Option<&[Rational]>,
        gradients: &BTreeMap<usize, S>,
        stratum: &[usize],
    ) -> Result<DjClass<S>, NaError> {
        let mut stratum = stratum.to_vec();
        stratum.sort_unstable();
        if stratum.is_empty() || !model.is_face(&stratum) {
            return Err(NaError::NotAStratum(stratum));
        }
        if let Some(c) = bundle {
            if c.len() != model.divisors().len() {
                return Err(NaError::CoefficientCount { expected: model.divisors().len(), got: c.len() });
            }
        }
        let mut coefficients = BTreeMap::new();
        for d in model.divisors() {
            if !model.meets(d.id, &stratum) {
                continue;
            }
            let g = gradients.get(&d.id).ok_or(NaError::MissingGradient(d.id))?;
            let c = bundle.map_or_else(S::zero, |c| S::from_rational(&c[d.id]));
            coefficients.insert(d.id, c - g);
        }
        Ok(DjClass { stratum, base: S::one(), coefficients })
    }

    pub fn pair(&self, model: &SncModel, table: &IntersectionTable) -> Result<S, NaError> {
        let power = model.dimension() + 1 - self.stratum.len();
        Ok(table.pairing(model, &self.stratum, power, &self.base, &self.coefficients)?)
    }
}

/// Builds the class and evaluates its top pairing on `E_J`.
pub fn dj_class<S: Scalar>(
    model: &SncModel,
    table: &IntersectionTable,
    bundle: Option<&[Rational]>,
    gradients: &BTreeMap<usize, S>,
    stratum: &[usize],
) -> Result<DjPairing<S>, NaError> {
    let class = DjClass::new(model, bundle, gradients, stratum)?;
    let pairing = class.pair(model, table)?;
    Ok(DjPairing { class, pairing })
}

/// A linear functional `base * beta + sum_i coefficients_i * gamma_i` on
/// classes `beta c_1(L) + sum gamma_i c_1(O(E_i))`; nefness asks for `>= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NefFunctional {
    pub name: String,
    pub base: Rational,
    pub coefficients: BTreeMap<usize, Rational>,
}

impl NefFunctional {
    /// Degree on the curve `E_J` (`|J| = n`), read from the table.
    pub fn degree_on_curve(model: &SncModel, table: &IntersectionTable, stratum: &[usize]) -> Result<Self, NaError> {
        let mut stratum = stratum.to_vec();
        stratum.sort_unstable();
        if stratum.len() != model.dimension() || !model.is_face(&stratum) {
            return Err(NaError::NotAStratum(stratum));
        }
        let base = table.value(model, &Monomial::new(1, [], &stratum))?;
        let mut coefficients = BTreeMap::new();
        for d in model.divisors() {
            if model.meets(d.id, &stratum) {
                coefficients.insert(d.id, table.value(model, &Monomial::new(0, [(d.id, 1)], &stratum))?);
            }
        }
        Ok(NefFunctional { name: format!("deg on E_{stratum:?}"), base, coefficients })
    }

    pub fn evaluate<S: Scalar>(&self, class: &DjClass<S>) -> S {
        let mut v = S::from_rational(&self.base) * &class.base;
        for (i, w) in &self.coefficients {
            if let Some(g) = class.coefficients.get(i) {
                v = v + &(S::from_rational(w) * g);
            }
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NefVerdict<S> {
    Nef,
    /// Every functional is `>= 0` and these ones vanish.
    Boundary { vanishing: Vec<usize> },
    Violated { index: usize, value: S },
}

/// Floating-point classes use [`Scalar::slack`] for the equality test.
pub fn nef_check<S: Scalar>(class: &DjClass<S>, inequalities: &[NefFunctional]) -> NefVerdict<S> {
    let mut vanishing = Vec::new();
    for (k, f) in inequalities.iter().enumerate() {
        let v = f.evaluate(class);
        let scale = f.coefficients.values().fold(f.base.clone(), |acc, c| acc + c.abs());
        let tol = S::slack(&S::from_rational(&scale));
        if v < -tol.clone() {
            return NefVerdict::Violated { index: k, value: v };
        }
        if v.abs() <= tol {
            vanishing.push(k);
        }
    }
    if vanishing.is_empty() {
        NefVerdict::Nef
    } else {
        NefVerdict::Boundary { vanishing }
    }
}

/// Table for a chain of `n` divisors `E_1..E_n` whose intersection is a
/// rational curve `E_J` with `deg O(E_i)|_{E_J} = -d_i`, capped by `E_0` and
/// `E_{n+1}` meeting it transversally in one point each. `L` restricts
/// trivially. Needs `sum d_i = 2`.
pub fn rational_curve_chain(d: &[Rational]) -> Result<(SncModel, IntersectionTable), NaError> {
    let n = d.len();
    let divisors = (0..n + 2).map(crate::skeleton::Divisor::reduced).collect();
    let mut faces = crate::skeleton::nonempty_subsets(&(0..=n).collect::<Vec<_>>());
    for f in crate::skeleton::nonempty_subsets(&(1..=n + 1).collect::<Vec<_>>()) {
        if !faces.contains(&f) {
            faces.push(f);
        }
    }
    let model = crate::skeleton::build_model(divisors, faces, n, true).expect("chain model is valid");
    let j: Vec<usize> = (1..=n).collect();
    let mut t = IntersectionTable::new(n);
    t.insert(Monomial::new(1, [], &j), Rational::zero())?;
    for (k, dk) in d.iter().enumerate() {
        t.insert(Monomial::new(0, [(k + 1, 1)], &j), -dk)?;
    }
    t.insert(Monomial::new(0, [(0, 1)], &j), int(1))?;
    t.insert(Monomial::new(0, [(n + 1, 1)], &j), int(1))?;
    Ok((model, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn zero_gradient_gives_l_power() {
        let model = SncModel::cycle(4).unwrap();
        let t = IntersectionTable::cycle(&[int(1), int(2), int(3), int(4)]);
        let g: BTreeMap<usize, Rational> = (0..4).map(|i| (i, int(0))).collect();
        let r = dj_class(&model, &t, None, &g, &[2]).unwrap();
        assert_eq!(r.pairing, int(3));
        let edge = dj_class(&model, &t, None, &g, &[1, 2]).unwrap();
        assert_eq!(edge.pairing, int(1));
    }

    #[test]
    fn missing_gradient_raises() {
        let model = SncModel::cycle(4).unwrap();
        let t = IntersectionTable::cycle(&vec![int(1); 4]);
        let g: BTreeMap<usize, Rational> = [(1, int(0)), (2, int(0))].into_iter().collect();
        assert_eq!(dj_class(&model, &t, None, &g, &[2]).unwrap_err(), NaError::MissingGradient(3));
        // E_0 does not meet E_2, so its gradient is never needed.
        let g: BTreeMap<usize, Rational> = [(1, int(0)), (2, int(0)), (3, int(0))].into_iter().collect();
        assert!(dj_class(&model, &t, None, &g, &[2]).is_ok());
    }

    #[test]
    fn chain_pairing_matches_gradient_formula() {
        let d = [ratio(1, 2), int(1), ratio(1, 2)];
        let (model, t) = rational_curve_chain(&d).unwrap();
        assert!(t.check_consistency(&model).is_consistent());
        let g: BTreeMap<usize, Rational> =
            [(0, ratio(1, 3)), (1, int(2)), (2, int(-1)), (3, int(0)), (4, ratio(5, 7))].into_iter().collect();
        let r = dj_class(&model, &t, None, &g, &[1, 2, 3]).unwrap();
        let inner: Rational = (1..=2).map(|i| &d[i - 1] * &g[&i]).sum();
        assert_eq!(r.pairing, inner - &g[&0] - &g[&4]);
    }

    #[test]
    fn gauge_shift_leaves_pairing_unchanged() {
        let (model, t) = rational_curve_chain(&[int(1), int(1)]).unwrap();
        let g: BTreeMap<usize, Rational> = (0..4).map(|i| (i, ratio(i as i64, 3))).collect();
        let base = dj_class(&model, &t, None, &g, &[1, 2]).unwrap().pairing;
        let shift = [int(2), int(-1), ratio(1, 2), int(3)];
        let shifted_g: BTreeMap<usize, Rational> = g.iter().map(|(&i, v)| (i, v + &shift[i])).collect();
        let p = dj_class(&model, &t, Some(&shift), &shifted_g, &[1, 2]).unwrap().pairing;
        assert_eq!(p, base);
        // Shifting by the full fibre class changes nothing either.
        let lambda = ratio(7, 4);
        let fibre: Vec<Rational> = vec![lambda.clone(); 4];
        let p = dj_class(&model, &t, Some(&fibre), &g, &[1, 2]).unwrap().pairing;
        assert_eq!(p, base);
    }

    #[test]
    fn nef_verdicts() {
        let (model, t) = rational_curve_chain(&[int(1), int(1)]).unwrap();
        let deg = NefFunctional::degree_on_curve(&model, &t, &[1, 2]).unwrap();
        let class = |g: [i64; 4]| {
            let g: BTreeMap<usize, Rational> = g.iter().enumerate().map(|(i, &v)| (i, int(v))).collect();
            DjClass::new(&model, None, &g, &[1, 2]).unwrap()
        };
        assert_eq!(nef_check(&class([0, 0, 0, 0]), &[]), NefVerdict::Nef);
        assert_eq!(nef_check(&class([0, 3, 0, 0]), std::slice::from_ref(&deg)), NefVerdict::Nef);
        assert!(matches!(
            nef_check(&class([2, 0, 0, 1]), std::slice::from_ref(&deg)),
            NefVerdict::Violated { index: 0, .. }
        ));
        // g_1 + g_2 = g_0 + g_3: the matching condition, so the degree vanishes.
        assert_eq!(
            nef_check(&class([1, 2, 1, 2]), std::slice::from_ref(&deg)),
            NefVerdict::Boundary { vanishing: vec![0] }
        );
    }
}
