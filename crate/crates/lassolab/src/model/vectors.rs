use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A coefficient vector in predictor space. All entries are finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefVector {
    values: Vec<f64>,
}

impl CoefVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "coefficient vector has a non-finite entry".into(),
            ));
        }
        Ok(CoefVector { values })
    }

    pub fn zeros(p: usize) -> Self {
        CoefVector {
            values: vec![0.0; p],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn as_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.values)
    }

    pub(crate) fn from_dvector(v: &DVector<f64>) -> Self {
        CoefVector {
            values: v.iter().copied().collect(),
        }
    }
}

/// Entrywise signs: each entry is -1, 0 or +1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignVector {
    values: Vec<i8>,
}

impl SignVector {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if values.iter().any(|&v| v < -1 || v > 1) {
            return Err(Error::InvalidArgument(
                "sign vector entries must lie in {-1, 0, +1}".into(),
            ));
        }
        Ok(SignVector { values })
    }

    pub fn values(&self) -> &[i8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| v as f64).collect()
    }
}

/// An ordered index subset of {1..p}. Indices are 1-based throughout the
/// public API; `zero_based` converts for slicing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Support {
    indices: Vec<usize>,
    ambient: usize,
}

impl Support {
    /// Builds a support from 1-based indices. Duplicates are rejected and the
    /// list is sorted ascending.
    pub fn new(mut indices: Vec<usize>, ambient: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("support has duplicate indices".into()));
        }
        if indices.iter().any(|&i| i == 0 || i > ambient) {
            return Err(Error::InvalidArgument(format!(
                "support index out of range 1..{ambient}"
            )));
        }
        Ok(Support { indices, ambient })
    }

    pub fn empty(ambient: usize) -> Self {
        Support {
            indices: Vec::new(),
            ambient,
        }
    }

    /// Cardinality s = |S|.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    /// 1-based member indices, ascending.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn contains(&self, index_one_based: usize) -> bool {
        self.indices.binary_search(&index_one_based).is_ok()
    }

    /// 0-based member indices, ascending.
    pub fn zero_based(&self) -> Vec<usize> {
        self.indices.iter().map(|&i| i - 1).collect()
    }

    /// 0-based complement indices, ascending.
    pub fn complement_zero_based(&self) -> Vec<usize> {
        (0..self.ambient)
            .filter(|i| !self.contains(i + 1))
            .collect()
    }

    /// True when S is a proper nonempty subset of {1..p}.
    pub fn is_proper_nonempty(&self) -> bool {
        !self.indices.is_empty() && self.indices.len() < self.ambient
    }

    /// True when `other` is contained in this support.
    pub fn contains_support(&self, other: &Support) -> bool {
        other.indices.iter().all(|&i| self.contains(i))
    }
}

/// The four norms used throughout: count of nonzeros, absolute sum,
/// Euclidean length and largest magnitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Norms {
    pub l0: usize,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

pub fn norms(beta: &CoefVector) -> Norms {
    let mut l0 = 0usize;
    let mut l1 = 0.0;
    let mut sq = 0.0;
    let mut linf: f64 = 0.0;
    for &v in beta.values() {
        let a = v.abs();
        if a > 0.0 {
            l0 += 1;
        }
        l1 += a;
        sq += v * v;
        linf = linf.max(a);
    }
    Norms {
        l0,
        l1,
        l2: sq.sqrt(),
        linf,
    }
}

fn scalar_sign(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else if x > 0.0 {
        1
    } else {
        0
    }
}

/// Entrywise sign map; sign(0) = 0 exactly.
pub fn sign_vector(beta: &CoefVector) -> SignVector {
    SignVector {
        values: beta.values().iter().map(|&v| scalar_sign(v)).collect(),
    }
}

/// Shrinks `x` toward zero by `lambda`, clipping to zero below the threshold.
pub fn soft_threshold(x: f64, lambda: f64) -> Result<f64> {
    if lambda < 0.0 {
        return Err(Error::InvalidArgument(
            "soft threshold level must be nonnegative".into(),
        ));
    }
    Ok(soft_threshold_unchecked(x, lambda))
}

#[inline]
pub(crate) fn soft_threshold_unchecked(x: f64, lambda: f64) -> f64 {
    if x > lambda {
        x - lambda
    } else if x < -lambda {
        x + lambda
    } else {
        0.0
    }
}

/// Indices with |beta_j| > tol, ascending. Negative tolerances behave as 0.
pub fn support_of(beta: &CoefVector, tol: f64) -> Support {
    let tol = tol.max(0.0);
    let indices = beta
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.abs() > tol)
        .map(|(i, _)| i + 1)
        .collect();
    Support {
        indices,
        ambient: beta.len(),
    }
}
