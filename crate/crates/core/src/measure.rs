//! Finitely supported measures on the dual complex.

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom<S> {
    /// Face of the model containing the support point.
    pub face: usize,
    /// Chart coordinates of the point within `face`.
    pub point: Vec<S>,
    pub mass: S,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomicMeasure<S> {
    pub atoms: Vec<Atom<S>>,
}

impl<S: Scalar> AtomicMeasure<S> {
    pub fn total(&self) -> S {
        self.atoms.iter().fold(S::zero(), |acc, a| acc + &a.mass)
    }

    pub fn masses(&self) -> Vec<S> {
        self.atoms.iter().map(|a| a.mass.clone()).collect()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.atoms.iter().all(|a| a.mass >= S::zero())
    }
}
