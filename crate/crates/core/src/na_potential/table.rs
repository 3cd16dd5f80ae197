//! Intersection numbers `(L^a . prod O(E_i)^{k_i} . E_J)` supplied as data.
//!
//! Nothing here computes intersection theory. The table stores what the user
//! supplies and fills in only two kinds of values on its own:
//!
//! * a product containing `c_1(O(E_i))` with `i` outside `J` is supported on
//!   `E_{J + T}` where `T` collects those divisors, so it vanishes when that
//!   set is not a face;
//! * a degree-zero monomial on a point stratum (`|J| = n + 1`) is `1`.
//!
//! The relation `c_1(O(sum b_i E_i)) = 0` is checked opportunistically by
//! [`IntersectionTable::check_consistency`].

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::scalar::{format_rational, int, multinomial, Rational, Scalar};
use crate::skeleton::SncModel;

/// One intersection monomial. The empty stratum denotes the generic fibre, so
/// `(L^n)` is `Monomial { l_power: n, divisor_powers: {}, stratum: [] }`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub l_power: usize,
    /// Exponents `k_i > 0`; zero exponents are never stored.
    pub divisor_powers: BTreeMap<usize, usize>,
    /// Sorted index set `J`.
    pub stratum: Vec<usize>,
}

impl Monomial {
    pub fn new(l_power: usize, divisor_powers: impl IntoIterator<Item = (usize, usize)>, stratum: &[usize]) -> Self {
        let mut powers = BTreeMap::new();
        for (i, k) in divisor_powers {
            if k > 0 {
                *powers.entry(i).or_insert(0) += k;
            }
        }
        let mut stratum = stratum.to_vec();
        stratum.sort_unstable();
        stratum.dedup();
        Monomial { l_power, divisor_powers: powers, stratum }
    }

    /// `(L^n)` on the generic fibre.
    pub fn top(n: usize) -> Self {
        Monomial::new(n, [], &[])
    }

    pub fn degree(&self) -> usize {
        self.l_power + self.divisor_powers.values().sum::<usize>()
    }

    /// Dimension of the cycle being intersected.
    pub fn stratum_dim(&self, n: usize) -> usize {
        if self.stratum.is_empty() {
            n
        } else {
            n + 1 - self.stratum.len()
        }
    }

    fn with_extra(&self, i: usize) -> Monomial {
        let mut m = self.clone();
        *m.divisor_powers.entry(i).or_insert(0) += 1;
        m
    }
}

impl std::fmt::Display for Monomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(L^{}", self.l_power)?;
        for (i, k) in &self.divisor_powers {
            write!(f, " . E{i}^{k}")?;
        }
        if self.stratum.is_empty() {
            write!(f, ")")
        } else {
            write!(f, " . E_{:?})", self.stratum)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TableError {
    #[error("missing intersection number {0}")]
    MissingTableEntry(Monomial),
    #[error("monomial {monomial} has degree {degree}, the stratum needs {expected}")]
    WrongDegree { monomial: Monomial, degree: usize, expected: usize },
    #[error("conflicting values for {0}")]
    Conflict(Monomial),
    #[error("{0} references an unknown divisor")]
    UnknownDivisor(Monomial),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Lookup {
    Given(Rational),
    /// Filled in from the combinatorics of the complex.
    Inferred(Rational),
    Missing,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IntersectionTable {
    n: usize,
    entries: BTreeMap<Monomial, Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConsistencyReport {
    pub checked: usize,
    pub unchecked: usize,
    /// Relations `sum_i b_i (M . E_i) = 0` that fail, with the offending sum.
    pub violations: Vec<(Monomial, Rational)>,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.violations.is_empty()
    }
}

impl IntersectionTable {
    pub fn new(n: usize) -> Self {
        IntersectionTable { n, entries: BTreeMap::new() }
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.entries.iter()
    }

    /// Inserts an entry after checking `a + sum k_i + |J| - 1 = n`. Re-inserting
    /// the same value is allowed; a different value is a conflict.
    pub fn insert(&mut self, monomial: Monomial, value: Rational) -> Result<(), TableError> {
        let expected = monomial.stratum_dim(self.n);
        if monomial.degree() != expected {
            return Err(TableError::WrongDegree { degree: monomial.degree(), expected, monomial });
        }
        match self.entries.get(&monomial) {
            Some(v) if *v != value => Err(TableError::Conflict(monomial)),
            _ => {
                self.entries.insert(monomial, value);
                Ok(())
            }
        }
    }

    /// Checks every referenced divisor exists in `model`.
    pub fn validate_against(&self, model: &SncModel) -> Result<(), TableError> {
        let count = model.divisors().len();
        for m in self.entries.keys() {
            if m.stratum.iter().chain(m.divisor_powers.keys()).any(|&i| i >= count)
                || (!m.stratum.is_empty() && !model.is_face(&m.stratum))
            {
                return Err(TableError::UnknownDivisor(m.clone()));
            }
        }
        Ok(())
    }

    pub fn lookup(&self, model: &SncModel, m: &Monomial) -> Lookup {
        if let Some(v) = self.entries.get(m) {
            return Lookup::Given(v.clone());
        }
        if m.stratum.is_empty() {
            return Lookup::Missing;
        }
        let mut support: BTreeSet<usize> = m.stratum.iter().copied().collect();
        support.extend(m.divisor_powers.keys().copied());
        if support.len() > m.stratum.len() && !model.is_face(&support.into_iter().collect::<Vec<_>>()) {
            return Lookup::Inferred(Rational::zero());
        }
        if m.degree() == 0 && m.stratum.len() == self.n + 1 {
            return Lookup::Inferred(Rational::one());
        }
        Lookup::Missing
    }

    pub fn value(&self, model: &SncModel, m: &Monomial) -> Result<Rational, TableError> {
        match self.lookup(model, m) {
            Lookup::Given(v) | Lookup::Inferred(v) => Ok(v),
            Lookup::Missing => Err(TableError::MissingTableEntry(m.clone())),
        }
    }

    /// `(L^n)`.
    pub fn top_power(&self) -> Result<Rational, TableError> {
        let m = Monomial::top(self.n);
        self.entries.get(&m).cloned().ok_or(TableError::MissingTableEntry(m))
    }

    /// Expands `(base c_1(L) + sum_i coeffs_i c_1(O(E_i)))^power . E_J`
    /// multinomially. Terms with a zero coefficient never touch the table.
    pub fn pairing<S: Scalar>(
        &self,
        model: &SncModel,
        stratum: &[usize],
        power: usize,
        base: &S,
        coeffs: &BTreeMap<usize, S>,
    ) -> Result<S, TableError> {
        if power == 0 {
            return Ok(S::from_rational(&self.value(model, &Monomial::new(0, [], stratum))?));
        }
        let mut slots: Vec<(Option<usize>, S)> = Vec::new();
        if !base.is_zero() {
            slots.push((None, base.clone()));
        }
        for (&i, c) in coeffs {
            if !c.is_zero() && model.meets(i, stratum) {
                slots.push((Some(i), c.clone()));
            }
        }
        let mut total = S::zero();
        let mut exps = vec![0usize; slots.len()];
        let mut failure = None;
        distribute(power, 0, &mut exps, &mut |exps| {
            if failure.is_some() {
                return;
            }
            let mut l_power = 0;
            let mut powers = Vec::new();
            let mut coeff = S::from_rational(&Rational::from_integer(multinomial(power, exps)));
            for ((slot, c), &k) in slots.iter().zip(exps.iter()) {
                match slot {
                    None => l_power = k,
                    Some(i) => powers.push((*i, k)),
                }
                coeff = coeff * &crate::scalar::pow(c, k);
            }
            let mono = Monomial::new(l_power, powers, stratum);
            match self.value(model, &mono) {
                Ok(v) => total = total.clone() + &(coeff * &S::from_rational(&v)),
                Err(e) => failure = Some(e),
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(total),
        }
    }

    /// Tests `sum_i b_i (M . c_1(O(E_i)) . E_J) = 0` for every monomial `M`
    /// obtained from a stored entry by removing one divisor factor.
    pub fn check_consistency(&self, model: &SncModel) -> ConsistencyReport {
        let mut bases = BTreeSet::new();
        for m in self.entries.keys().filter(|m| !m.stratum.is_empty()) {
            for &i in m.divisor_powers.keys() {
                let mut b = m.clone();
                let k = b.divisor_powers.get_mut(&i).unwrap();
                *k -= 1;
                if *k == 0 {
                    b.divisor_powers.remove(&i);
                }
                bases.insert(b);
            }
        }
        let mut report = ConsistencyReport::default();
        'base: for b in bases {
            let mut sum = Rational::zero();
            for d in model.divisors() {
                match self.lookup(model, &b.with_extra(d.id)) {
                    Lookup::Given(v) | Lookup::Inferred(v) => sum += v * int(d.multiplicity as i64),
                    Lookup::Missing => {
                        report.unchecked += 1;
                        continue 'base;
                    }
                }
            }
            report.checked += 1;
            if !sum.is_zero() {
                report.violations.push((b, sum));
            }
        }
        report
    }

    /// Table of the `I_N` cycle with `deg L|_{E_i} = degrees[i]`:
    /// `E_i^2 = -2`, `E_i . E_{i+-1} = 1`, `(L) = sum d_i`.
    pub fn cycle(degrees: &[Rational]) -> IntersectionTable {
        let len = degrees.len();
        let mut t = IntersectionTable::new(1);
        for (i, d) in degrees.iter().enumerate() {
            t.insert(Monomial::new(1, [], &[i]), d.clone()).unwrap();
            t.insert(Monomial::new(0, [(i, 1)], &[i]), int(-2)).unwrap();
            t.insert(Monomial::new(0, [((i + 1) % len, 1)], &[i]), int(1)).unwrap();
            t.insert(Monomial::new(0, [((i + len - 1) % len, 1)], &[i]), int(1)).unwrap();
        }
        t.insert(Monomial::top(1), degrees.iter().sum()).unwrap();
        t
    }
}

impl std::fmt::Display for IntersectionTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (m, v) in &self.entries {
            writeln!(f, "{m} = {}", format_rational(v))?;
        }
        Ok(())
    }
}

fn distribute(remaining: usize, slot: usize, exps: &mut [usize], emit: &mut impl FnMut(&[usize])) {
    if exps.is_empty() {
        return;
    }
    if slot + 1 == exps.len() {
        exps[slot] = remaining;
        emit(exps);
        return;
    }
    for k in 0..=remaining {
        exps[slot] = k;
        distribute(remaining - k, slot + 1, exps, emit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_is_checked() {
        let mut t = IntersectionTable::new(2);
        assert!(t.insert(Monomial::new(1, [], &[0]), int(1)).is_err());
        assert!(t.insert(Monomial::new(1, [(1, 1)], &[0]), int(1)).is_ok());
        assert!(t.insert(Monomial::new(0, [(1, 1)], &[0, 1]), int(3)).is_ok());
        assert!(matches!(t.insert(Monomial::new(0, [(1, 1)], &[1, 0]), int(4)), Err(TableError::Conflict(_))));
    }

    #[test]
    fn divisor_factor_order_is_irrelevant() {
        let a = Monomial::new(0, [(2, 1), (0, 1)], &[1]);
        let b = Monomial::new(0, [(0, 1), (2, 1)], &[1]);
        assert_eq!(a, b);
    }

    #[test]
    fn cycle_table_is_consistent() {
        let model = SncModel::cycle(5).unwrap();
        let t = IntersectionTable::cycle(&[int(1), int(0), int(2), int(1), int(3)]);
        t.validate_against(&model).unwrap();
        let report = t.check_consistency(&model);
        assert!(report.is_consistent());
        assert_eq!(report.checked, 5);
        // E_0 and E_2 are disjoint in a 5-cycle.
        assert_eq!(t.lookup(&model, &Monomial::new(0, [(2, 1)], &[0])), Lookup::Inferred(int(0)));
    }

    #[test]
    fn inconsistent_self_intersection_is_reported() {
        let model = SncModel::cycle(4).unwrap();
        let mut t = IntersectionTable::new(1);
        for i in 0..4 {
            let self_int = if i == 2 { -3 } else { -2 };
            t.insert(Monomial::new(0, [(i, 1)], &[i]), int(self_int)).unwrap();
            t.insert(Monomial::new(0, [((i + 1) % 4, 1)], &[i]), int(1)).unwrap();
            t.insert(Monomial::new(0, [((i + 3) % 4, 1)], &[i]), int(1)).unwrap();
        }
        let report = t.check_consistency(&model);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].1, int(-1));
    }

    #[test]
    fn pairing_expands_multinomially() {
        let model = SncModel::cycle(3).unwrap();
        let t = IntersectionTable::cycle(&[int(1), int(1), int(1)]);
        let c: BTreeMap<usize, Rational> = [(0, int(0)), (1, int(1)), (2, int(0))].into_iter().collect();
        let mass = t.pairing(&model, &[1], 1, &int(1), &c).unwrap();
        assert_eq!(mass, int(-1));
        let missing = IntersectionTable::new(1).pairing(&model, &[1], 1, &int(1), &c);
        assert!(matches!(missing, Err(TableError::MissingTableEntry(_))));
        // Point strata: the degree-0 pairing is 1.
        assert_eq!(t.pairing(&model, &[0, 1], 0, &int(1), &c).unwrap(), int(1));
    }
}
