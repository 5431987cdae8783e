//! Shared fixtures for unit tests.

use nalgebra::DMatrix;

use crate::model::DesignMatrix;

/// Five-variable example Gram: four orthonormal predictors plus a fifth
/// sharing correlation rho with each of them.
pub(crate) fn example_gram(rho: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(5, 5);
    for i in 0..4 {
        m[(i, 4)] = rho;
        m[(4, i)] = rho;
    }
    m
}

/// Realizes a target Gram matrix as a square design.
pub(crate) fn design_from_gram(target: &DMatrix<f64>) -> DesignMatrix {
    crate::design::design_from_gram(target).unwrap()
}

/// A p-by-p design whose Gram matrix is the identity.
pub(crate) fn orthonormal_design(p: usize) -> DesignMatrix {
    DesignMatrix::new(DMatrix::identity(p, p) * (p as f64).sqrt()).unwrap()
}
