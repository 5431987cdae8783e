//! Minimization of quadratic forms over l1 cone sections.
//!
//! Every design-condition constant of the restricted-eigenvalue family is a
//! minimum of delta' Sigma delta over a cone {||delta_Sc||_1 <= L f(delta_S)}
//! under some normalization of the support block. The cone is the union of
//! 2^s convex pieces, one per sign pattern of delta_S. Within a piece the
//! support block is sigma (.) u with u >= 0 and the complement block splits
//! into a nonnegative pair a - b, so each piece becomes a smooth problem over
//! a product of simplex-like sets, solved here by projected gradient descent
//! with backtracking. Ratio objectives are nonconvex, so those problems run
//! from several deterministic starts.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::Support;

const MAX_ITERS: usize = 50_000;
const REL_TOL: f64 = 1e-10;

/// Which constant is being minimized.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum ConeConstant {
    /// s * q(delta) with ||delta_S||_1 = 1, ||delta_Sc||_1 <= L.
    Compatibility,
    /// q(delta) / ||delta_S||_2^2 over the l1 cone.
    Restricted,
    /// q(delta) / ||delta||_2^2 over the l1 cone.
    StrongRestricted,
    /// q(delta) with ||delta_S||_2 = 1, ||delta_Sc||_1 <= L sqrt(s).
    AdaptiveRestricted,
}

/// Result of a cone minimization: the constant value and the attaining
/// direction in predictor space.
pub(crate) struct ConeMinimum {
    pub value: f64,
    pub witness: DVector<f64>,
}

/// An iterate with its derived quantities; one Gram product per evaluation,
/// shared between the objective and the gradient.
struct Eval {
    z: DVector<f64>,
    delta: DVector<f64>,
    w: DVector<f64>,
    q: f64,
    value: f64,
}

pub(crate) struct ConeProgram<'a> {
    sigma: &'a DMatrix<f64>,
    s_idx: Vec<usize>,
    c_idx: Vec<usize>,
    l: f64,
    kind: ConeConstant,
}

impl<'a> ConeProgram<'a> {
    pub fn new(
        sigma: &'a DMatrix<f64>,
        support: &Support,
        l: f64,
        kind: ConeConstant,
    ) -> Result<Self> {
        if support.ambient() != sigma.nrows() {
            return Err(Error::InvalidArgument(
                "support dimension does not match the Gram matrix".into(),
            ));
        }
        if !support.is_proper_nonempty() {
            return Err(Error::InvalidArgument(
                "cone constants need a nonempty proper support".into(),
            ));
        }
        if !(l > 0.0) {
            return Err(Error::InvalidArgument(
                "cone opening parameter must be positive".into(),
            ));
        }
        if support.len() > 20 {
            return Err(Error::Refusal(format!(
                "support of size {} requires 2^{} sign patterns",
                support.len(),
                support.len()
            )));
        }
        Ok(ConeProgram {
            sigma,
            s_idx: support.zero_based(),
            c_idx: support.complement_zero_based(),
            l,
            kind,
        })
    }

    pub fn solve(&self) -> ConeMinimum {
        let s = self.s_idx.len();
        let mut best_value = f64::INFINITY;
        let mut best_delta = DVector::zeros(self.sigma.nrows());
        // delta -> -delta symmetry halves the pattern enumeration
        let patterns = 1usize << (s - 1);
        for code in 0..patterns {
            let signs: Vec<f64> = (0..s)
                .map(|i| {
                    if i == 0 {
                        1.0
                    } else if (code >> (i - 1)) & 1 == 1 {
                        -1.0
                    } else {
                        1.0
                    }
                })
                .collect();
            let (value, delta) = self.solve_pattern(&signs, code as u64);
            if value < best_value {
                best_value = value;
                best_delta = delta;
            }
        }
        ConeMinimum {
            value: best_value.max(0.0),
            witness: best_delta,
        }
    }

    /// Scale-invariant objective evaluated directly on a predictor-space
    /// direction; used to re-certify witnesses.
    pub fn objective(&self, delta: &DVector<f64>) -> f64 {
        let q = (self.sigma * delta).dot(delta);
        let s = self.s_idx.len() as f64;
        match self.kind {
            ConeConstant::Compatibility => {
                let l1: f64 = self.s_idx.iter().map(|&i| delta[i].abs()).sum();
                s * q / (l1 * l1)
            }
            ConeConstant::Restricted | ConeConstant::AdaptiveRestricted => {
                let sq: f64 = self.s_idx.iter().map(|&i| delta[i] * delta[i]).sum();
                q / sq
            }
            ConeConstant::StrongRestricted => q / delta.norm_squared(),
        }
    }

    fn complement_cap(&self) -> f64 {
        match self.kind {
            ConeConstant::AdaptiveRestricted => self.l * (self.s_idx.len() as f64).sqrt(),
            _ => self.l,
        }
    }

    fn solve_pattern(&self, signs: &[f64], pattern_seed: u64) -> (f64, DVector<f64>) {
        let s = self.s_idx.len();
        let m = self.c_idx.len();
        let dim = s + 2 * m;
        let mut best = (f64::INFINITY, DVector::zeros(self.sigma.nrows()));

        let starts = self.starting_points(signs, pattern_seed, dim);
        for z0 in starts {
            let z = self.descend(self.project(z0), signs);
            let delta = self.delta_of(&z, signs);
            let value = self.objective(&delta);
            if value.is_finite() && value < best.0 {
                best = (value, delta);
            }
        }
        best
    }

    fn starting_points(&self, signs: &[f64], pattern_seed: u64, dim: usize) -> Vec<DVector<f64>> {
        let s = self.s_idx.len();
        let m = self.c_idx.len();
        let p = self.sigma.nrows();
        let mut starts = Vec::new();

        let mut uniform = DVector::zeros(dim);
        for i in 0..s {
            uniform[i] = 1.0 / s as f64;
        }
        starts.push(uniform);

        let convex = self.kind == ConeConstant::Compatibility;
        if !convex {
            // corner starts only at small scale; they multiply fast
            if s <= 4 || p <= 16 {
                for corner in 0..s {
                    let mut z = DVector::zeros(dim);
                    z[corner] = 1.0;
                    starts.push(z);
                }
            }
            // direction of smallest curvature, folded into this orthant
            // (either orientation of the eigenvector may fit the pattern)
            let eig = self.sigma.clone().symmetric_eigen();
            let (mut k_min, mut lam_min) = (0usize, f64::INFINITY);
            for (k, &lam) in eig.eigenvalues.iter().enumerate() {
                if lam < lam_min {
                    lam_min = lam;
                    k_min = k;
                }
            }
            let v = eig.eigenvectors.column(k_min);
            for orientation in [1.0, -1.0] {
                let mut z = DVector::zeros(dim);
                let mut mass = 0.0;
                for (i, &gi) in self.s_idx.iter().enumerate() {
                    z[i] = (orientation * signs[i] * v[gi]).max(0.0);
                    mass += z[i];
                }
                if mass > 1e-12 {
                    let scale = 1.0 / mass;
                    for i in 0..s {
                        z[i] *= scale;
                    }
                    for (k, &gc) in self.c_idx.iter().enumerate() {
                        let w = orientation * v[gc] * scale;
                        if w >= 0.0 {
                            z[s + k] = w;
                        } else {
                            z[s + m + k] = -w;
                        }
                    }
                    starts.push(z);
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0xC0DE ^ pattern_seed);
            let mut z = DVector::zeros(dim);
            for i in 0..dim {
                z[i] = rng.random::<f64>();
            }
            starts.push(z);
        }
        starts
    }

    fn delta_of(&self, z: &DVector<f64>, signs: &[f64]) -> DVector<f64> {
        let s = self.s_idx.len();
        let m = self.c_idx.len();
        let mut delta = DVector::zeros(self.sigma.nrows());
        for i in 0..s {
            delta[self.s_idx[i]] = signs[i] * z[i];
        }
        for k in 0..m {
            delta[self.c_idx[k]] = z[s + k] - z[s + m + k];
        }
        delta
    }

    /// Objective in pattern coordinates. Compatibility and the two ratio
    /// kinds live on the simplex slice ||u||_1 = 1; the adaptive kind rides
    /// the nonnegative l2 sphere, which turns its denominator constant.
    fn evaluate(&self, z: DVector<f64>, signs: &[f64]) -> Eval {
        let delta = self.delta_of(&z, signs);
        let w = self.sigma * &delta;
        let q = w.dot(&delta).max(0.0);
        let s = self.s_idx.len();
        let value = match self.kind {
            ConeConstant::Compatibility => s as f64 * q,
            ConeConstant::AdaptiveRestricted => q,
            ConeConstant::Restricted => {
                let d: f64 = (0..s).map(|i| z[i] * z[i]).sum();
                q / d.max(1e-300)
            }
            ConeConstant::StrongRestricted => q / delta.norm_squared().max(1e-300),
        };
        Eval {
            z,
            delta,
            w,
            q,
            value,
        }
    }

    fn gradient(&self, eval: &Eval, signs: &[f64]) -> DVector<f64> {
        let s = self.s_idx.len();
        let m = self.c_idx.len();
        // dq/dz through the linear map z -> delta, with w = Sigma delta
        let mut gq = DVector::zeros(s + 2 * m);
        for i in 0..s {
            gq[i] = 2.0 * signs[i] * eval.w[self.s_idx[i]];
        }
        for k in 0..m {
            gq[s + k] = 2.0 * eval.w[self.c_idx[k]];
            gq[s + m + k] = -2.0 * eval.w[self.c_idx[k]];
        }

        match self.kind {
            ConeConstant::Compatibility => gq * s as f64,
            ConeConstant::AdaptiveRestricted => gq,
            ConeConstant::Restricted => {
                let d: f64 = (0..s).map(|i| eval.z[i] * eval.z[i]).sum();
                let d = d.max(1e-300);
                let mut g = gq / d;
                let factor = eval.q / (d * d);
                for i in 0..s {
                    g[i] -= factor * 2.0 * eval.z[i];
                }
                g
            }
            ConeConstant::StrongRestricted => {
                let d = eval.delta.norm_squared().max(1e-300);
                let mut g = gq / d;
                let factor = eval.q / (d * d);
                for i in 0..s {
                    g[i] -= factor * 2.0 * eval.z[i];
                }
                for k in 0..m {
                    let dc = eval.delta[self.c_idx[k]];
                    g[s + k] -= factor * 2.0 * dc;
                    g[s + m + k] += factor * 2.0 * dc;
                }
                g
            }
        }
    }

    fn project(&self, mut z: DVector<f64>) -> DVector<f64> {
        let s = self.s_idx.len();
        let m = self.c_idx.len();
        let mut u: Vec<f64> = (0..s).map(|i| z[i]).collect();
        match self.kind {
            ConeConstant::AdaptiveRestricted => project_nonneg_sphere(&mut u),
            _ => project_simplex(&mut u, 1.0),
        }
        for i in 0..s {
            z[i] = u[i];
        }
        let mut ab: Vec<f64> = (0..2 * m).map(|k| z[s + k]).collect();
        project_capped_simplex(&mut ab, self.complement_cap());
        for k in 0..2 * m {
            z[s + k] = ab[k];
        }
        z
    }

    fn descend(&self, z0: DVector<f64>, signs: &[f64]) -> DVector<f64> {
        let mut current = self.evaluate(z0, signs);
        let gersh: f64 = (0..self.sigma.nrows())
            .map(|i| (0..self.sigma.ncols()).map(|j| self.sigma[(i, j)].abs()).sum())
            .fold(0.0_f64, f64::max);
        let mut step = 1.0 / (1.0 + 2.0 * gersh * self.s_idx.len() as f64);
        let mut flat_count = 0;
        for _ in 0..MAX_ITERS {
            let g = self.gradient(&current, signs);
            let mut accepted = false;
            let mut t = step;
            for _ in 0..60 {
                let cand_z = self.project(&current.z - &g * t);
                let cand = self.evaluate(cand_z, signs);
                if cand.value < current.value {
                    let rel =
                        (current.value - cand.value).abs() / current.value.abs().max(1e-30);
                    current = cand;
                    step = (t * 1.5).min(1e6);
                    accepted = true;
                    if rel < REL_TOL {
                        flat_count += 1;
                    } else {
                        flat_count = 0;
                    }
                    break;
                }
                t *= 0.5;
            }
            if !accepted || flat_count >= 2 {
                break;
            }
        }
        current.z
    }
}

/// Euclidean projection onto {x >= 0, sum x = radius}.
pub(crate) fn project_simplex(v: &mut [f64], radius: f64) {
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (k, &val) in sorted.iter().enumerate() {
        acc += val;
        let cand = (acc - radius) / (k + 1) as f64;
        if val - cand > 0.0 {
            theta = cand;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - theta).max(0.0);
    }
}

/// Euclidean projection onto {x >= 0, sum x <= radius}.
pub(crate) fn project_capped_simplex(v: &mut [f64], radius: f64) {
    let mut sum = 0.0;
    for x in v.iter_mut() {
        *x = x.max(0.0);
        sum += *x;
    }
    if sum > radius {
        project_simplex(v, radius);
    }
}

/// Euclidean projection onto {x >= 0, ||x||_2 = 1}.
pub(crate) fn project_nonneg_sphere(v: &mut [f64]) {
    let mut norm_sq = 0.0;
    let mut arg_max = 0;
    let mut val_max = f64::NEG_INFINITY;
    for (i, x) in v.iter_mut().enumerate() {
        if *x > val_max {
            val_max = *x;
            arg_max = i;
        }
        *x = x.max(0.0);
        norm_sq += *x * *x;
    }
    if norm_sq <= 1e-300 {
        for x in v.iter_mut() {
            *x = 0.0;
        }
        v[arg_max] = 1.0;
    } else {
        let inv = 1.0 / norm_sq.sqrt();
        for x in v.iter_mut() {
            *x *= inv;
        }
    }
}
