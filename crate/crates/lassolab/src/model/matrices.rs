use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{CoefVector, Support};

/// An n-by-p design with finite entries; rows are observations, columns are
/// predictors.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    entries: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() == 0 || entries.ncols() == 0 {
            return Err(Error::InvalidArgument(
                "design matrix needs at least one row and one column".into(),
            ));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "design matrix has a non-finite entry".into(),
            ));
        }
        Ok(DesignMatrix { entries })
    }

    /// Builds from row slices; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidArgument("no rows given".into()));
        }
        let p = rows[0].len();
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidArgument("ragged rows".into()));
        }
        let m = DMatrix::from_fn(rows.len(), p, |i, j| rows[i][j]);
        DesignMatrix::new(m)
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn p(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Applies the design to a coefficient vector: X beta.
    pub fn apply(&self, beta: &DVector<f64>) -> DVector<f64> {
        &self.entries * beta
    }
}

/// The scaled Gram matrix X'X / n; symmetric p-by-p.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    matrix: DMatrix<f64>,
}

impl GramMatrix {
    /// Wraps an explicit matrix, enforcing symmetry to 1e-12.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument("Gram matrix must be square".into()));
        }
        let p = matrix.nrows();
        for i in 0..p {
            for j in (i + 1)..p {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidArgument(format!(
                        "Gram matrix asymmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        Ok(GramMatrix { matrix: sym })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Extracts the square submatrix on the given 0-based indices.
    pub(crate) fn principal_submatrix(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.matrix[(idx[i], idx[j])])
    }
}

/// Computes the scaled Gram matrix of a design.
pub fn gram(x: &DesignMatrix) -> GramMatrix {
    let xt_x = x.entries().transpose() * x.entries();
    let scaled = xt_x / x.n() as f64;
    // exact symmetry regardless of accumulation order
    let sym = (&scaled + scaled.transpose()) * 0.5;
    GramMatrix { matrix: sym }
}

/// The four blocks of a Gram matrix partitioned by a support: indices in S
/// first, then the complement.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionedGram {
    pub support_block: DMatrix<f64>,
    pub cross_block: DMatrix<f64>,
    pub cross_block_t: DMatrix<f64>,
    pub complement_block: DMatrix<f64>,
}

/// Splits a Gram matrix into its S-by-S, S-by-S^c, S^c-by-S and S^c-by-S^c
/// blocks. The support must be a proper nonempty subset.
pub fn partition_gram(sigma: &GramMatrix, support: &Support) -> Result<PartitionedGram> {
    if support.ambient() != sigma.dim() {
        return Err(Error::InvalidArgument(
            "support ambient dimension does not match the Gram matrix".into(),
        ));
    }
    if !support.is_proper_nonempty() {
        return Err(Error::InvalidArgument(
            "partition needs a nonempty proper support".into(),
        ));
    }
    let s_idx = support.zero_based();
    let c_idx = support.complement_zero_based();
    let m = sigma.matrix();
    let support_block = DMatrix::from_fn(s_idx.len(), s_idx.len(), |i, j| m[(s_idx[i], s_idx[j])]);
    let cross_block = DMatrix::from_fn(s_idx.len(), c_idx.len(), |i, j| m[(s_idx[i], c_idx[j])]);
    let complement_block =
        DMatrix::from_fn(c_idx.len(), c_idx.len(), |i, j| m[(c_idx[i], c_idx[j])]);
    let cross_block_t = cross_block.transpose();
    Ok(PartitionedGram {
        support_block,
        cross_block,
        cross_block_t,
        complement_block,
    })
}

/// Orthonormal basis of {v : Xv = 0}, empty for full column rank.
///
/// Computed from the spectral decomposition of X'X; a direction counts as
/// null when its singular value is at most 1e-10 * (1 + max |X_ij|).
pub fn null_space_basis(x: &DesignMatrix) -> Vec<CoefVector> {
    let xt_x = x.entries().transpose() * x.entries();
    let sym = (&xt_x + xt_x.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let tol = 1e-10 * (1.0 + x.max_abs());
    let mut basis = Vec::new();
    for (k, _) in eig.eigenvalues.iter().enumerate() {
        let v: DVector<f64> = eig.eigenvectors.column(k).into_owned();
        // thresholding ||Xv|| directly avoids the precision loss of
        // deriving singular values from eigenvalues of X'X
        if (x.entries() * &v).norm() <= tol {
            basis.push(CoefVector::from_dvector(&v));
        }
    }
    basis
}

/// Smallest eigenvalue of a symmetric matrix. Inputs asymmetric beyond 1e-10
/// are rejected.
pub fn min_eigen(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("matrix must be square".into()));
    }
    let p = m.nrows();
    for i in 0..p {
        for j in (i + 1)..p {
            if (m[(i, j)] - m[(j, i)]).abs() > 1e-10 {
                return Err(Error::InvalidArgument(format!(
                    "matrix asymmetric at ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}
