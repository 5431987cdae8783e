//! A desk-scale laboratory for l1-penalized regression.
//!
//! The crate solves penalized least-squares problems (noisy, noiseless, and
//! the minimum-l1 interpolation limit), computes the design-condition
//! constants that govern when such solutions are trustworthy (mutual
//! incoherence, restricted isometry, restricted null space, restricted
//! eigenvalues, the compatibility constant, irrepresentability), and checks
//! the standard prediction/estimation error bounds against solved instances,
//! replication by replication.
//!
//! Start with [`model`] for the basic types, [`solver`] for fitting,
//! [`conditions`] for design diagnostics, and [`experiment`] for seeded
//! Monte Carlo runs. The companion `book/` directory walks through the
//! concepts chapter by chapter; its code snippets compile and run as part
//! of this crate's test suite.

pub mod bounds;
mod cone;
pub mod conditions;
pub mod design;
pub mod error;
pub mod experiment;
pub mod io;
pub mod model;
pub mod solver;
#[cfg(test)]
pub(crate) mod testkit;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/foundations.md")]
    mod foundations {}
    #[doc = include_str!("../../../book/src/solvers.md")]
    mod solvers {}
    #[doc = include_str!("../../../book/src/conditions.md")]
    mod conditions {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
