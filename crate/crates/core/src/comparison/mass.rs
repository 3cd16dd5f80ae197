use crate::scalar::Scalar;

/// Contributions to the total mass of a measure on the skeleton: point masses
/// at vertices and integrals of face densities.
#[derive(Debug, Clone, PartialEq)]
pub struct MassLedger<S> {
    pub atoms: Vec<(usize, S)>,
    /// `(face, integral of the density over the face)`.
    pub integrals: Vec<(usize, S)>,
}

impl<S: Scalar> Default for MassLedger<S> {
    fn default() -> Self {
        MassLedger { atoms: Vec::new(), integrals: Vec::new() }
    }
}

impl<S: Scalar> MassLedger<S> {
    pub fn total(&self) -> S {
        self.atoms.iter().chain(&self.integrals).fold(S::zero(), |acc, (_, m)| acc + m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassVerdict<S> {
    pub total: S,
    pub expected: S,
    /// `total - expected`.
    pub excess: S,
    pub pass: bool,
}

/// Compares the ledger total with `(L^n)`; `tol` is absolute.
pub fn total_mass_check<S: Scalar>(ledger: &MassLedger<S>, l_top: &S, tol: &S) -> MassVerdict<S> {
    let total = ledger.total();
    let excess = total.clone() - l_top;
    let pass = excess.abs() <= *tol;
    MassVerdict { total, expected: l_top.clone(), excess, pass }
}
