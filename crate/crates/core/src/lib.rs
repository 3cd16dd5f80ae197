//! Toolkit for maximal degenerations of Calabi-Yau manifolds.
//!
//! The combinatorial side is exact ([`scalar::Rational`]):
//!
//! - [`skeleton`]: snc models, dual complexes, essential skeletons and their
//!   Lebesgue measure.
//! - [`na_potential`]: intersection tables, model functions, tropical
//!   Fubini-Study potentials, non-archimedean Monge-Ampère masses and the
//!   `D_J` class.
//! - [`comparison`]: checks relating the non-archimedean and real pictures.
//!
//! The numerical side runs in `f64`:
//!
//! - [`real_ma`]: subgradient measures of convex PL functions and a discrete
//!   Monge-Ampère solver.
//! - [`hybrid_mc`]: Monte Carlo sampling of Calabi-Yau measures on local
//!   models near a stratum.
//! - [`geometry`]: semiflat forms, the Calabi ansatz and its generalization.
//!
//! ```
//! use nama::na_potential::{na_ma_model_metric, IntersectionTable};
//! use nama::scalar::int;
//! use nama::skeleton::SncModel;
//!
//! let d = [int(2), int(1), int(1)];
//! let model = SncModel::cycle(3).unwrap();
//! let mu = na_ma_model_metric(&model, &IntersectionTable::cycle(&d), &[int(0), int(0), int(1)]).unwrap();
//! assert_eq!(mu.total(), int(4));
//! ```

pub mod comparison;
pub mod config;
pub mod geometry;
pub mod hybrid_mc;
pub mod measure;
pub mod na_potential;
pub mod real_ma;
pub mod scalar;
pub mod skeleton;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/na_potential.md")]
    mod na_potential {}
    #[doc = include_str!("../../../book/src/real_ma.md")]
    mod real_ma {}
    #[doc = include_str!("../../../book/src/comparison.md")]
    mod comparison {}
    #[doc = include_str!("../../../book/src/hybrid_mc.md")]
    mod hybrid_mc {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
