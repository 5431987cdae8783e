//! Seeded design-matrix generators for the experiment families.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DesignMatrix;

/// The built-in design families.
///
/// * `Identity`: the literal identity (n = p).
/// * `Orthonormal`: sqrt(n) times an orthonormal basis, so the Gram matrix
///   is the identity.
/// * `Equicorrelated`: p - 1 orthonormal predictors plus one more sharing
///   correlation rho with each of them.
/// * `Toeplitz`: Gram entries rho^|i - j|.
/// * `Example1` / `Example2`: the single-row designs (1, 2) and (2, 1).
/// * `Gaussian`: independent standard normal entries with columns rescaled
///   to unit mean-square norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DesignFamily {
    Identity,
    Orthonormal,
    Equicorrelated,
    Toeplitz,
    Example1,
    Example2,
    Gaussian,
}

impl std::str::FromStr for DesignFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(DesignFamily::Identity),
            "orthonormal" => Ok(DesignFamily::Orthonormal),
            "equicorrelated" => Ok(DesignFamily::Equicorrelated),
            "toeplitz" => Ok(DesignFamily::Toeplitz),
            "example1" => Ok(DesignFamily::Example1),
            "example2" => Ok(DesignFamily::Example2),
            "gaussian" => Ok(DesignFamily::Gaussian),
            other => Err(Error::InvalidArgument(format!("unknown design family '{other}'"))),
        }
    }
}

/// A fully specified design: family, shape, family parameter and seed.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DesignSpec {
    pub family: DesignFamily,
    pub n: usize,
    pub p: usize,
    /// Correlation parameter for the equicorrelated and toeplitz families;
    /// ignored elsewhere.
    pub rho: f64,
    /// Seed for the gaussian and orthonormal families; ignored elsewhere.
    pub seed: u64,
}

/// Realizes a target Gram matrix as a square design through its symmetric
/// root: X = sqrt(p) Sigma^{1/2}, so X'X / p reproduces Sigma exactly.
/// Every condition constant depends on the design only through its Gram
/// matrix, so this suffices for studying arbitrary correlation structures.
pub fn design_from_gram(target: &DMatrix<f64>) -> Result<DesignMatrix> {
    let p = target.nrows();
    let eig = target.clone().symmetric_eigen();
    if let Some(lam) = eig.eigenvalues.iter().find(|&&lam| lam < -1e-10) {
        return Err(Error::InvalidArgument(format!(
            "target Gram matrix is not positive semidefinite (eigenvalue {lam:.3e})"
        )));
    }
    let mut root = DMatrix::zeros(p, p);
    for k in 0..p {
        let lam = eig.eigenvalues[k].max(0.0).sqrt();
        let v = eig.eigenvectors.column(k);
        root += lam * &v * v.transpose();
    }
    DesignMatrix::new(root * (p as f64).sqrt())
}

fn equicorrelated_gram(p: usize, rho: f64) -> Result<DMatrix<f64>> {
    if p < 2 {
        return Err(Error::InvalidArgument(
            "equicorrelated family needs p >= 2".into(),
        ));
    }
    let limit = 1.0 / ((p - 1) as f64).sqrt();
    if rho.abs() > limit + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "equicorrelated Gram is not positive semidefinite for |rho| > {limit:.6}"
        )));
    }
    let mut m = DMatrix::identity(p, p);
    for i in 0..p - 1 {
        m[(i, p - 1)] = rho;
        m[(p - 1, i)] = rho;
    }
    Ok(m)
}

pub fn generate_design(spec: &DesignSpec) -> Result<DesignMatrix> {
    match spec.family {
        DesignFamily::Identity => {
            if spec.n != spec.p {
                return Err(Error::InvalidArgument("identity family needs n = p".into()));
            }
            DesignMatrix::new(DMatrix::identity(spec.n, spec.p))
        }
        DesignFamily::Orthonormal => {
            if spec.n < spec.p {
                return Err(Error::InvalidArgument(
                    "orthonormal family needs n >= p".into(),
                ));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let raw = DMatrix::from_fn(spec.n, spec.p, |_, _| rng.sample::<f64, _>(StandardNormal));
            let qr = raw.qr();
            let q = qr.q();
            DesignMatrix::new(q * (spec.n as f64).sqrt())
        }
        DesignFamily::Equicorrelated => {
            let gram = equicorrelated_gram(spec.p, spec.rho)?;
            design_from_gram(&gram)
        }
        DesignFamily::Toeplitz => {
            if spec.rho.abs() >= 1.0 {
                return Err(Error::InvalidArgument(
                    "toeplitz family needs |rho| < 1".into(),
                ));
            }
            let p = spec.p;
            let gram = DMatrix::from_fn(p, p, |i, j| spec.rho.powi((i as i32 - j as i32).abs()));
            design_from_gram(&gram)
        }
        DesignFamily::Example1 => DesignMatrix::from_rows(&[vec![1.0, 2.0]]),
        DesignFamily::Example2 => DesignMatrix::from_rows(&[vec![2.0, 1.0]]),
        DesignFamily::Gaussian => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            let mut m = DMatrix::from_fn(spec.n, spec.p, |_, _| {
                rng.sample::<f64, _>(StandardNormal)
            });
            let n = spec.n as f64;
            for mut col in m.column_iter_mut() {
                let norm = col.norm();
                if norm > 0.0 {
                    col *= n.sqrt() / norm;
                }
            }
            DesignMatrix::new(m)
        }
    }
}
