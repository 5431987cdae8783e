//! Design-condition constants: mutual incoherence, restricted isometry,
//! restricted null space, restricted eigenvalues (plain, adaptive, strong),
//! the compatibility constant, irrepresentability, the beta-min condition,
//! and the implication gates that tie them together.
//!
//! All constants are NP-hard to evaluate exactly in general; this module is
//! a desk-scale laboratory. Subset and sign-pattern enumerations refuse to
//! run past explicit caps instead of blowing up.

use std::collections::BTreeMap;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use crate::cone::{ConeConstant, ConeProgram};
use crate::error::{Error, Result};
use crate::model::{
    gram, min_eigen, null_space_basis, partition_gram, CoefVector, DesignMatrix, GramMatrix,
    SignVector, Support,
};

/// Default cap on the number of column subsets an enumeration may visit.
pub const DEFAULT_SUBSET_CAP: usize = 100_000;

/// Strictness cutoff: a cone constant counts as positive above this value.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// An l1 cone specification: the support S and the opening parameter L.
#[derive(Clone, Debug)]
pub struct ConeSpec {
    pub support: Support,
    pub l: f64,
}

impl ConeSpec {
    pub fn new(support: Support, l: f64) -> Result<Self> {
        if !(l > 0.0) {
            return Err(Error::InvalidArgument(
                "cone opening parameter must be positive".into(),
            ));
        }
        if !support.is_proper_nonempty() {
            return Err(Error::InvalidArgument(
                "cone support must be nonempty and proper".into(),
            ));
        }
        Ok(ConeSpec { support, l })
    }
}

/// A named constant with its verdict, an optional attaining direction, and
/// free-form numeric annotations.
#[derive(Clone, Debug, serde::Serialize)]
pub struct ConditionReport {
    pub name: String,
    pub value: f64,
    pub satisfied: bool,
    pub witness: Option<Vec<f64>>,
    pub meta: BTreeMap<String, f64>,
}

impl ConditionReport {
    fn new(name: &str, value: f64, satisfied: bool) -> Self {
        ConditionReport {
            name: name.into(),
            value,
            satisfied,
            witness: None,
            meta: BTreeMap::new(),
        }
    }

    fn with_meta(mut self, key: &str, value: f64) -> Self {
        self.meta.insert(key.into(), value);
        self
    }

    fn with_witness(mut self, witness: Vec<f64>) -> Self {
        self.witness = Some(witness);
        self
    }
}

fn binomial_capped(p: usize, s: usize, cap: usize) -> usize {
    let mut acc: u128 = 1;
    for k in 0..s {
        acc = acc.saturating_mul((p - k) as u128) / (k + 1) as u128;
        if acc > cap as u128 {
            return cap + 1;
        }
    }
    acc as usize
}

/// Largest absolute pairwise column correlation of a column-normalized
/// design. Columns must satisfy diag(Gram) = 1 within 1e-8.
pub fn mutual_incoherence(x: &DesignMatrix) -> Result<ConditionReport> {
    let sigma = gram(x);
    let m = sigma.matrix();
    for j in 0..m.nrows() {
        if (m[(j, j)] - 1.0).abs() > 1e-8 {
            return Err(Error::Precondition(format!(
                "column {} is not normalized to unit mean-square (diagonal entry {:.6})",
                j + 1,
                m[(j, j)]
            )));
        }
    }
    let mut best = 0.0;
    let mut pair = (0usize, 0usize);
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            if m[(i, j)].abs() > best {
                best = m[(i, j)].abs();
                pair = (i, j);
            }
        }
    }
    Ok(ConditionReport::new("mutual_incoherence", best, true)
        .with_meta("col_i", (pair.0 + 1) as f64)
        .with_meta("col_j", (pair.1 + 1) as f64))
}

/// Worst deviation from isometry over all size-s column submatrices:
/// max over subsets T of max(lambda_max - 1, 1 - lambda_min) of the Gram
/// block on T. Satisfied when the constant stays below one, i.e. every
/// submatrix is nonsingular.
pub fn rip_constant(x: &DesignMatrix, s: usize, subset_cap: usize) -> Result<ConditionReport> {
    let p = x.p();
    if s == 0 || s > p {
        return Err(Error::InvalidArgument(format!(
            "isometry order must lie in 1..={p}"
        )));
    }
    let count = binomial_capped(p, s, subset_cap);
    if count > subset_cap {
        return Err(Error::Refusal(format!(
            "{p} choose {s} exceeds the subset cap {subset_cap}"
        )));
    }
    let sigma = gram(x);
    let mut best = f64::NEG_INFINITY;
    let mut best_subset: Vec<usize> = Vec::new();
    let mut best_eigs = (0.0, 0.0);
    let mut scanned = 0usize;
    for subset in (0..p).combinations(s) {
        let block = sigma.principal_submatrix(&subset);
        let eig = block.symmetric_eigen();
        let lo = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = eig
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        let dev = (hi - 1.0).max(1.0 - lo);
        if dev > best {
            best = dev;
            best_subset = subset;
            best_eigs = (lo, hi);
        }
        scanned += 1;
    }
    let mut witness = vec![0.0; p];
    for &j in &best_subset {
        witness[j] = 1.0;
    }
    Ok(ConditionReport::new("rip_constant", best, best < 1.0)
        .with_witness(witness)
        .with_meta("order", s as f64)
        .with_meta("lambda_min", best_eigs.0)
        .with_meta("lambda_max", best_eigs.1)
        .with_meta("subsets_scanned", scanned as f64))
}

/// Decides whether the kernel of X meets the cone C(S, L) only at zero.
///
/// The reported value is the best cone margin L ||v_S||_1 - ||v_Sc||_1 found
/// over unit-norm kernel vectors; nonnegative margins are violations. With a
/// trivial kernel the margin is reported as -1.
pub fn restricted_nullspace_holds(
    x: &DesignMatrix,
    support: &Support,
    l: f64,
) -> Result<ConditionReport> {
    if !(l > 0.0) {
        return Err(Error::InvalidArgument(
            "cone opening parameter must be positive".into(),
        ));
    }
    if !support.is_proper_nonempty() || support.ambient() != x.p() {
        return Err(Error::InvalidArgument(
            "support must be a nonempty proper subset matching the design".into(),
        ));
    }
    let s = support.len();
    if s > 20 {
        return Err(Error::Refusal(format!(
            "support of size {s} requires 2^{s} sign patterns"
        )));
    }
    let kernel = null_space_basis(x);
    let dim = kernel.len();
    if dim == 0 {
        return Ok(
            ConditionReport::new("restricted_nullspace", -1.0, true).with_meta("kernel_dim", 0.0),
        );
    }

    let s_idx = support.zero_based();
    let c_idx = support.complement_zero_based();
    let margin_of = |v: &DVector<f64>| -> f64 {
        let on: f64 = s_idx.iter().map(|&i| v[i].abs()).sum();
        let off: f64 = c_idx.iter().map(|&i| v[i].abs()).sum();
        l * on - off
    };

    let (margin, witness) = if dim == 1 {
        let v = kernel[0].as_dvector();
        (margin_of(&v), v)
    } else {
        // maximize the margin over the unit sphere of kernel combinations,
        // one concave piece per sign pattern of the support block
        let basis = DMatrix::from_fn(x.p(), dim, |i, k| kernel[k].values()[i]);
        let mut best = f64::NEG_INFINITY;
        let mut best_v = basis.column(0).into_owned();
        for code in 0..(1usize << (s - 1)) {
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
            // linear part of the concave objective for this pattern
            let mut lin = DVector::zeros(dim);
            for (i, &gi) in s_idx.iter().enumerate() {
                for k in 0..dim {
                    lin[k] += l * signs[i] * basis[(gi, k)];
                }
            }
            let mut starts: Vec<DVector<f64>> = Vec::new();
            if lin.norm() > 1e-14 {
                let unit: DVector<f64> = &lin / lin.norm();
                starts.push(-&unit);
                starts.push(unit);
            }
            for k in 0..dim {
                let mut e = DVector::zeros(dim);
                e[k] = 1.0;
                starts.push(e);
            }
            for mut c in starts {
                for iter in 0..4000 {
                    let v = &basis * &c;
                    let val = margin_of(&v);
                    if val > best {
                        best = val;
                        best_v = v.clone();
                    }
                    // subgradient of L sigma' v_S - ||v_Sc||_1 pulled back to
                    // kernel coordinates
                    let mut g = lin.clone();
                    for &ci in &c_idx {
                        let sgn = if v[ci] > 0.0 {
                            1.0
                        } else if v[ci] < 0.0 {
                            -1.0
                        } else {
                            0.0
                        };
                        for k in 0..dim {
                            g[k] -= sgn * basis[(ci, k)];
                        }
                    }
                    let step = 0.5 / ((iter + 1) as f64).sqrt();
                    let mut next = &c + &g * step;
                    let norm = next.norm();
                    if norm <= 1e-14 {
                        break;
                    }
                    next /= norm;
                    if (&next - &c).norm() < 1e-14 {
                        break;
                    }
                    c = next;
                }
            }
        }
        (best, best_v)
    };

    let satisfied = margin < -POSITIVITY_TOL;
    let mut report = ConditionReport::new("restricted_nullspace", margin, satisfied)
        .with_meta("kernel_dim", dim as f64)
        .with_meta("cone_l", l);
    if !satisfied {
        report = report.with_witness(witness.iter().copied().collect());
    }
    Ok(report)
}

fn cone_constant_report(
    name: &str,
    x: &DesignMatrix,
    support: &Support,
    l: f64,
    kind: ConeConstant,
) -> Result<ConditionReport> {
    let sigma = gram(x);
    let program = ConeProgram::new(sigma.matrix(), support, l, kind)?;
    let min = program.solve();
    let report = ConditionReport::new(name, min.value, min.value > POSITIVITY_TOL)
        .with_witness(min.witness.iter().copied().collect())
        .with_meta("cone_l", l)
        .with_meta("support_size", support.len() as f64);
    Ok(report)
}

/// The compatibility constant of the cone: the minimum of
/// s/n ||X delta||_2^2 over ||delta_S||_1 = 1, ||delta_Sc||_1 <= L.
///
/// The factor s in the numerator makes the constant cohere with the
/// prediction and estimation bounds that consume it; the meta field records
/// this normalization.
pub fn compatibility_constant(x: &DesignMatrix, cone: &ConeSpec) -> Result<ConditionReport> {
    if cone.support.ambient() != x.p() {
        return Err(Error::InvalidArgument(
            "cone support dimension does not match the design".into(),
        ));
    }
    Ok(cone_constant_report(
        "compatibility",
        x,
        &cone.support,
        cone.l,
        ConeConstant::Compatibility,
    )?
    .with_meta("s_scaled_normalization", 1.0))
}

/// Restricted eigenvalue for one fixed support: the minimum of
/// (1/n) ||X delta||_2^2 / ||delta_S||_2^2 over the cone C(S, L).
pub fn restricted_eigenvalue_at(
    x: &DesignMatrix,
    support: &Support,
    l: f64,
) -> Result<ConditionReport> {
    cone_constant_report("restricted_eigenvalue", x, support, l, ConeConstant::Restricted)
}

/// Adaptive restricted eigenvalue for one fixed support: the same quotient
/// over the wider cone ||delta_Sc||_1 <= L sqrt(s) ||delta_S||_2.
pub fn adaptive_restricted_eigenvalue_at(
    x: &DesignMatrix,
    support: &Support,
    l: f64,
) -> Result<ConditionReport> {
    cone_constant_report(
        "adaptive_restricted_eigenvalue",
        x,
        support,
        l,
        ConeConstant::AdaptiveRestricted,
    )
}

/// Strong restricted eigenvalue for one fixed support: the quotient with the
/// full ||delta||_2^2 in the denominator.
pub fn strong_restricted_eigenvalue_at(
    x: &DesignMatrix,
    support: &Support,
    l: f64,
) -> Result<ConditionReport> {
    cone_constant_report(
        "strong_restricted_eigenvalue",
        x,
        support,
        l,
        ConeConstant::StrongRestricted,
    )
}

fn all_supports_min(
    name: &str,
    x: &DesignMatrix,
    s: usize,
    l: f64,
    subset_cap: usize,
    kind: ConeConstant,
) -> Result<ConditionReport> {
    let p = x.p();
    if s == 0 || s >= p {
        return Err(Error::InvalidArgument(format!(
            "support size must lie in 1..{p}"
        )));
    }
    let count = binomial_capped(p, s, subset_cap);
    if count > subset_cap {
        return Err(Error::Refusal(format!(
            "{p} choose {s} exceeds the subset cap {subset_cap}"
        )));
    }
    let sigma = gram(x);
    let mut best = f64::INFINITY;
    let mut best_witness = Vec::new();
    let mut scanned = 0usize;
    for subset in (0..p).combinations(s) {
        let support = Support::new(subset.iter().map(|&j| j + 1).collect(), p)?;
        let program = ConeProgram::new(sigma.matrix(), &support, l, kind)?;
        let min = program.solve();
        if min.value < best {
            best = min.value;
            best_witness = min.witness.iter().copied().collect();
        }
        scanned += 1;
    }
    Ok(ConditionReport::new(name, best, best > POSITIVITY_TOL)
        .with_witness(best_witness)
        .with_meta("cone_l", l)
        .with_meta("support_size", s as f64)
        .with_meta("subsets_scanned", scanned as f64))
}

/// Restricted eigenvalue minimized over every support of size s.
pub fn restricted_eigenvalue(
    x: &DesignMatrix,
    s: usize,
    l: f64,
    subset_cap: usize,
) -> Result<ConditionReport> {
    all_supports_min(
        "restricted_eigenvalue",
        x,
        s,
        l,
        subset_cap,
        ConeConstant::Restricted,
    )
}

/// Adaptive restricted eigenvalue minimized over every support of size s.
pub fn adaptive_restricted_eigenvalue(
    x: &DesignMatrix,
    s: usize,
    l: f64,
    subset_cap: usize,
) -> Result<ConditionReport> {
    all_supports_min(
        "adaptive_restricted_eigenvalue",
        x,
        s,
        l,
        subset_cap,
        ConeConstant::AdaptiveRestricted,
    )
}

/// Strong restricted eigenvalue minimized over every support of size s.
pub fn strong_restricted_eigenvalue(
    x: &DesignMatrix,
    s: usize,
    l: f64,
    subset_cap: usize,
) -> Result<ConditionReport> {
    all_supports_min(
        "strong_restricted_eigenvalue",
        x,
        s,
        l,
        subset_cap,
        ConeConstant::StrongRestricted,
    )
}

fn invert_support_block(sigma: &GramMatrix, support: &Support) -> Result<(DMatrix<f64>, DMatrix<f64>, f64)> {
    let part = partition_gram(sigma, support)?;
    let lam_min = min_eigen(&part.support_block)?;
    if lam_min <= 1e-10 {
        return Err(Error::Precondition(format!(
            "the support block of the Gram matrix must have a positive smallest eigenvalue; got {lam_min:.3e}"
        )));
    }
    let inv = part.support_block.clone().try_inverse().ok_or_else(|| {
        Error::Precondition("the support block of the Gram matrix is not invertible".into())
    })?;
    Ok((part.cross_block_t, inv, lam_min))
}

/// Weak irrepresentability for a fixed sign assignment on the support:
/// the sup-norm of Sigma_21 Sigma_11^{-1} tau. Satisfied when at most one;
/// the meta field records whether the inequality is strict.
pub fn weak_irrepresentable(
    sigma: &GramMatrix,
    support: &Support,
    tau: &SignVector,
) -> Result<ConditionReport> {
    if tau.len() != support.len() {
        return Err(Error::InvalidArgument(
            "sign vector length must equal the support size".into(),
        ));
    }
    let (cross_t, inv, lam_min) = invert_support_block(sigma, support)?;
    let tau_vec = DVector::from_vec(tau.as_f64());
    let image = &cross_t * (&inv * &tau_vec);
    let value = image.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(
        ConditionReport::new("weak_irrepresentable", value, value <= 1.0)
            .with_meta("strict", if value < 1.0 { 1.0 } else { 0.0 })
            .with_meta("support_block_min_eigen", lam_min),
    )
}

/// Uniform irrepresentability: the largest sup-norm of
/// Sigma_21 Sigma_11^{-1} tau over sign vectors tau on the support. The
/// maximum of this convex function over the sup-norm ball sits at a vertex,
/// so vertices are enumerated. Satisfied when the value is strictly below 1.
pub fn uniform_irrepresentable(sigma: &GramMatrix, support: &Support) -> Result<ConditionReport> {
    let s = support.len();
    if s > 20 {
        return Err(Error::Refusal(format!(
            "support of size {s} requires 2^{s} sign vertices"
        )));
    }
    let (cross_t, inv, lam_min) = invert_support_block(sigma, support)?;
    let map = &cross_t * &inv;
    let mut theta = f64::NEG_INFINITY;
    let mut best_tau = vec![1.0; s];
    // tau -> -tau symmetry: fix the first sign
    for code in 0..(1usize << (s - 1)) {
        let tau: Vec<f64> = (0..s)
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
        let image = &map * DVector::from_column_slice(&tau);
        let norm = image.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm > theta {
            theta = norm;
            best_tau = tau;
        }
    }
    let mut witness = vec![0.0; support.ambient()];
    for (k, &j) in support.zero_based().iter().enumerate() {
        witness[j] = best_tau[k];
    }
    Ok(
        ConditionReport::new("uniform_irrepresentable", theta, theta < 1.0)
            .with_witness(witness)
            .with_meta("support_block_min_eigen", lam_min),
    )
}

/// Whether the smallest nonzero true coefficient clears the detection
/// threshold 4 lambda s0 / phi_comp^2.
pub fn beta_min_check(
    beta0: &CoefVector,
    lambda: f64,
    support: &Support,
    phi_comp_sq: f64,
) -> Result<ConditionReport> {
    if support.is_empty() {
        return Err(Error::InvalidArgument(
            "beta-min needs a nonempty true support".into(),
        ));
    }
    if !(phi_comp_sq > 0.0) {
        return Err(Error::InvalidArgument(
            "beta-min needs a positive compatibility constant".into(),
        ));
    }
    let value = support
        .zero_based()
        .iter()
        .map(|&j| beta0.values()[j].abs())
        .fold(f64::INFINITY, f64::min);
    let threshold = 4.0 * lambda * support.len() as f64 / phi_comp_sq;
    Ok(
        ConditionReport::new("beta_min", value, value >= threshold)
            .with_meta("threshold", threshold),
    )
}

/// The three sufficiency gates, evaluated on the first-s support {1..s}:
///
/// * `rip_route`: isometry constant of order min(2s, p) below 1/3;
/// * `mip_route`: mutual incoherence below 1/(3s);
/// * `ir_route`: when the uniform irrepresentability value theta is below
///   1/L, the compatibility constant must dominate (1 - L theta)^2 times the
///   squared smallest eigenvalue of the support block.
pub fn implication_checks(x: &DesignMatrix, s: usize, l: f64) -> Result<Vec<ConditionReport>> {
    let p = x.p();
    if s == 0 || s >= p {
        return Err(Error::InvalidArgument(format!(
            "support size must lie in 1..{p}"
        )));
    }
    let support = Support::new((1..=s).collect(), p)?;
    let sigma = gram(x);

    let order = (2 * s).min(p);
    let rip = rip_constant(x, order, DEFAULT_SUBSET_CAP)?;
    let rip_report = ConditionReport::new("rip_route", rip.value, rip.value < 1.0 / 3.0)
        .with_meta("order", order as f64)
        .with_meta("threshold", 1.0 / 3.0);

    let mip = mutual_incoherence(x)?;
    let mip_threshold = 1.0 / (3.0 * s as f64);
    let mip_report = ConditionReport::new("mip_route", mip.value, mip.value < mip_threshold)
        .with_meta("threshold", mip_threshold);

    let uniform = uniform_irrepresentable(&sigma, &support)?;
    let theta = uniform.value;
    let lam_min = uniform.meta["support_block_min_eigen"];
    let ir_report = if theta < 1.0 / l {
        let bound = (1.0 - l * theta).powi(2) * lam_min * lam_min;
        let comp = compatibility_constant(x, &ConeSpec::new(support, l)?)?;
        ConditionReport::new("ir_route", bound, comp.value >= bound - 1e-8)
            .with_meta("theta", theta)
            .with_meta("compatibility", comp.value)
            .with_meta("support_block_min_eigen", lam_min)
            .with_meta("applicable", 1.0)
    } else {
        ConditionReport::new("ir_route", theta, false)
            .with_meta("theta", theta)
            .with_meta("applicable", 0.0)
    };

    Ok(vec![rip_report, mip_report, ir_report])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DesignMatrix;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    use crate::testkit::{design_from_gram, example_gram, orthonormal_design};

    #[test]
    fn incoherence_of_orthonormal_design_is_zero() {
        let x = orthonormal_design(4);
        let r = mutual_incoherence(&x).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn incoherence_of_example_design_is_rho() {
        for &rho in &[0.1, 0.3, 0.49] {
            let x = design_from_gram(&example_gram(rho));
            let r = mutual_incoherence(&x).unwrap();
            assert_abs_diff_eq!(r.value, rho, epsilon = 1e-9);
        }
    }

    #[test]
    fn incoherence_matches_pair_scan_oracle() {
        let raw = DesignMatrix::from_rows(
            &(0..10)
                .map(|i| (0..6).map(|j| ((3 * i + 5 * j) as f64).sin()).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        // normalize columns to unit mean square
        let n = raw.n() as f64;
        let mut cols = raw.entries().clone();
        for mut c in cols.column_iter_mut() {
            let norm = c.norm();
            c *= n.sqrt() / norm;
        }
        let x = DesignMatrix::new(cols).unwrap();
        let g = gram(&x);
        let mut oracle = 0.0f64;
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    oracle = oracle.max(g.matrix()[(i, j)].abs());
                }
            }
        }
        let r = mutual_incoherence(&x).unwrap();
        assert_abs_diff_eq!(r.value, oracle, epsilon = 1e-14);
    }

    #[test]
    fn incoherence_names_a_bad_column() {
        let x = DesignMatrix::from_rows(&[vec![2.0, 1.0], vec![2.0, -1.0]]).unwrap();
        let err = mutual_incoherence(&x).unwrap_err();
        assert!(err.to_string().contains("column 1"));
    }

    #[test]
    fn rip_of_orthonormal_design_is_zero() {
        let x = orthonormal_design(5);
        for s in 1..=4 {
            let r = rip_constant(&x, s, DEFAULT_SUBSET_CAP).unwrap();
            assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn rip_of_example_design_matches_reported_constant() {
        let x = design_from_gram(&example_gram(0.5));
        let r = rip_constant(&x, 4, DEFAULT_SUBSET_CAP).unwrap();
        // sqrt(3)/2: the worst size-4 block pairs the correlated variable
        // with three orthonormal ones
        assert_abs_diff_eq!(r.value, 3.0f64.sqrt() / 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.value, 0.866, epsilon = 1e-3);
    }

    #[test]
    fn rip_pairs_match_closed_form_oracle() {
        let raw = DesignMatrix::from_rows(
            &(0..12)
                .map(|i| (0..6).map(|j| ((7 * i + 11 * j) as f64 * 0.23).cos()).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        let n = raw.n() as f64;
        let mut cols = raw.entries().clone();
        for mut c in cols.column_iter_mut() {
            let norm = c.norm();
            c *= n.sqrt() / norm;
        }
        let x = DesignMatrix::new(cols).unwrap();
        let g = gram(&x);
        // 2x2 blocks have eigenvalues (a+c)/2 +- sqrt(((a-c)/2)^2 + b^2)
        let mut oracle = f64::NEG_INFINITY;
        for i in 0..6 {
            for j in (i + 1)..6 {
                let (a, b, c) = (g.matrix()[(i, i)], g.matrix()[(i, j)], g.matrix()[(j, j)]);
                let mid = 0.5 * (a + c);
                let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
                oracle = oracle.max((mid + rad - 1.0).max(1.0 - (mid - rad)));
            }
        }
        let r = rip_constant(&x, 2, DEFAULT_SUBSET_CAP).unwrap();
        assert_abs_diff_eq!(r.value, oracle, epsilon = 1e-10);
    }

    #[test]
    fn rip_refuses_past_cap() {
        let x = orthonormal_design(30);
        assert!(matches!(
            rip_constant(&x, 15, 1000),
            Err(Error::Refusal(_))
        ));
    }

    #[test]
    fn nullspace_verdicts_for_the_two_line_designs() {
        // one row (1, 2): kernel along (2, -1); the support {2} cone misses it
        let x = DesignMatrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        let s = Support::new(vec![2], 2).unwrap();
        let r = restricted_nullspace_holds(&x, &s, 1.0).unwrap();
        assert!(r.satisfied);

        // one row (2, 1): kernel along (1, -2) lies inside the cone
        let x = DesignMatrix::from_rows(&[vec![2.0, 1.0]]).unwrap();
        let r = restricted_nullspace_holds(&x, &s, 1.0).unwrap();
        assert!(!r.satisfied);
        let w = r.witness.unwrap();
        assert_abs_diff_eq!(w[0] * -2.0 - w[1], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn nullspace_trivial_kernel_is_satisfied() {
        let x = orthonormal_design(3);
        let s = Support::new(vec![1, 2], 3).unwrap();
        let r = restricted_nullspace_holds(&x, &s, 3.0).unwrap();
        assert!(r.satisfied);
        assert_eq!(r.meta["kernel_dim"], 0.0);
    }

    #[test]
    fn nullspace_multidimensional_kernel() {
        // two rows, four columns: kernel has dimension 2; the all-ones row
        // forces large support mass, so a wide cone catches kernel vectors
        let x = DesignMatrix::from_rows(&[vec![1.0, 1.0, 1.0, 1.0], vec![1.0, -1.0, 1.0, -1.0]])
            .unwrap();
        // kernel contains (1, 0, -1, 0) and (0, 1, 0, -1)
        let s = Support::new(vec![1, 3], 4).unwrap();
        let r = restricted_nullspace_holds(&x, &s, 1.0).unwrap();
        assert!(!r.satisfied, "kernel vector (1,0,-1,0) sits on the cone");
    }

    #[test]
    fn compatibility_identity_lower_bound() {
        let x = orthonormal_design(5);
        for s in [1usize, 2, 3] {
            let cone = ConeSpec::new(Support::new((1..=s).collect(), 5).unwrap(), 3.0).unwrap();
            let r = compatibility_constant(&x, &cone).unwrap();
            assert!(r.value >= 1.0 - 1e-6, "value {} at s {}", r.value, s);
            assert!(r.satisfied);
        }
    }

    #[test]
    fn compatibility_degenerates_at_critical_rho() {
        // at rho = 1/2 the kernel direction (1,1,1,1,-2) lies inside the
        // L = 3 cone, so the constant is exactly zero
        let x = design_from_gram(&example_gram(0.5));
        let cone = ConeSpec::new(Support::new(vec![1, 2, 3, 4], 5).unwrap(), 3.0).unwrap();
        let r = compatibility_constant(&x, &cone).unwrap();
        assert!(r.value <= 1e-8, "value {}", r.value);
        assert!(!r.satisfied);
    }

    #[test]
    fn compatibility_positive_below_critical_rho() {
        let x = design_from_gram(&example_gram(0.4));
        let cone = ConeSpec::new(Support::new(vec![1, 2, 3, 4], 5).unwrap(), 3.0).unwrap();
        let r = compatibility_constant(&x, &cone).unwrap();
        assert!(r.satisfied, "value {}", r.value);
    }

    #[test]
    fn restricted_eigenvalue_identity_lower_bound() {
        let x = orthonormal_design(4);
        let r = restricted_eigenvalue(&x, 2, 3.0, DEFAULT_SUBSET_CAP).unwrap();
        assert!(r.value >= 1.0 - 1e-6);
    }

    #[test]
    fn restricted_eigenvalue_degenerates_at_critical_rho() {
        let x = design_from_gram(&example_gram(0.5));
        let s = Support::new(vec![1, 2, 3, 4], 5).unwrap();
        let r = restricted_eigenvalue_at(&x, &s, 3.0).unwrap();
        assert!(r.value <= 1e-8, "value {}", r.value);
    }

    #[test]
    fn strong_constant_identity_is_one() {
        let x = orthonormal_design(4);
        let s = Support::new(vec![1, 2], 4).unwrap();
        let r = strong_restricted_eigenvalue_at(&x, &s, 2.0).unwrap();
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn adaptive_identity_lower_bound() {
        let x = orthonormal_design(4);
        let s = Support::new(vec![1, 2], 4).unwrap();
        let r = adaptive_restricted_eigenvalue_at(&x, &s, 2.0).unwrap();
        assert!(r.value >= 1.0 - 1e-6);
    }

    #[test]
    fn constant_ordering_chain() {
        // strong <= plain and adaptive <= plain (wider cone), while the
        // s-scaled compatibility dominates the plain constant
        let x = design_from_gram(&example_gram(0.3));
        let s = Support::new(vec![1, 2, 3, 4], 5).unwrap();
        let l = 2.0;
        let plain = restricted_eigenvalue_at(&x, &s, l).unwrap().value;
        let strong = strong_restricted_eigenvalue_at(&x, &s, l).unwrap().value;
        let adaptive = adaptive_restricted_eigenvalue_at(&x, &s, l).unwrap().value;
        let comp = compatibility_constant(&x, &ConeSpec::new(s, l).unwrap())
            .unwrap()
            .value;
        let slack = 1e-6;
        assert!(strong <= plain + slack, "strong {strong} plain {plain}");
        assert!(adaptive <= plain + slack, "adaptive {adaptive} plain {plain}");
        assert!(comp >= plain - slack, "comp {comp} plain {plain}");
    }

    #[test]
    fn weak_irrepresentable_example_values() {
        let g = GramMatrix::new(example_gram(0.5)).unwrap();
        let s = Support::new(vec![1, 2, 3, 4], 5).unwrap();
        let tau = SignVector::new(vec![1, 1, 1, 1]).unwrap();
        let r = weak_irrepresentable(&g, &s, &tau).unwrap();
        assert_abs_diff_eq!(r.value, 2.0, epsilon = 1e-9);
        assert!(!r.satisfied);

        // alternating signs cancel the row sums
        let tau = SignVector::new(vec![1, -1, 1, -1]).unwrap();
        let r = weak_irrepresentable(&g, &s, &tau).unwrap();
        assert_abs_diff_eq!(r.value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn weak_irrepresentable_diagonal_gram_is_zero() {
        let g = GramMatrix::new(DMatrix::identity(4, 4)).unwrap();
        let s = Support::new(vec![1, 2], 4).unwrap();
        let tau = SignVector::new(vec![1, -1]).unwrap();
        let r = weak_irrepresentable(&g, &s, &tau).unwrap();
        assert_abs_diff_eq!(r.value, 0.0);
        assert!(r.satisfied);
    }

    #[test]
    fn uniform_irrepresentable_brackets_quarter_threshold() {
        let s = Support::new(vec![1, 2, 3, 4], 5).unwrap();
        let g = GramMatrix::new(example_gram(0.2)).unwrap();
        let r = uniform_irrepresentable(&g, &s).unwrap();
        assert_abs_diff_eq!(r.value, 0.8, epsilon = 1e-9);
        assert!(r.satisfied);

        let g = GramMatrix::new(example_gram(0.3)).unwrap();
        let r = uniform_irrepresentable(&g, &s).unwrap();
        assert_abs_diff_eq!(r.value, 1.2, epsilon = 1e-9);
        assert!(!r.satisfied);
    }

    #[test]
    fn uniform_dominates_weak_for_every_sign_vector() {
        let g = GramMatrix::new(example_gram(0.35)).unwrap();
        let s = Support::new(vec![1, 2, 3, 4], 5).unwrap();
        let theta = uniform_irrepresentable(&g, &s).unwrap().value;
        for code in 0..16u32 {
            let tau: Vec<i8> = (0..4)
                .map(|i| if (code >> i) & 1 == 1 { -1 } else { 1 })
                .collect();
            let tau = SignVector::new(tau).unwrap();
            let weak = weak_irrepresentable(&g, &s, &tau).unwrap().value;
            assert!(weak <= theta + 1e-12);
        }
    }

    #[test]
    fn singular_support_block_is_a_precondition_error() {
        let mut m = DMatrix::identity(3, 3);
        m[(0, 1)] = 1.0;
        m[(1, 0)] = 1.0;
        let g = GramMatrix::new(m).unwrap();
        let s = Support::new(vec![1, 2], 3).unwrap();
        let tau = SignVector::new(vec![1, 1]).unwrap();
        let err = weak_irrepresentable(&g, &s, &tau).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        assert!(err.to_string().contains("smallest eigenvalue"));
    }

    #[test]
    fn beta_min_arithmetic() {
        let s = Support::new(vec![1, 2], 2).unwrap();
        let beta = CoefVector::new(vec![5.0, 5.0]).unwrap();
        let r = beta_min_check(&beta, 0.1, &s, 1.0).unwrap();
        assert_abs_diff_eq!(r.meta["threshold"], 0.8);
        assert!(r.satisfied);

        let beta = CoefVector::new(vec![0.5, 5.0]).unwrap();
        let r = beta_min_check(&beta, 0.1, &s, 1.0).unwrap();
        assert!(!r.satisfied);

        assert!(beta_min_check(&beta, 0.1, &Support::empty(2), 1.0).is_err());
    }

    #[test]
    fn implication_checks_identity_design() {
        let x = orthonormal_design(5);
        let reports = implication_checks(&x, 2, 1.0).unwrap();
        assert!(reports.iter().all(|r| r.satisfied));
        let ir = &reports[2];
        assert_abs_diff_eq!(ir.value, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn implication_checks_example_design_low_rho() {
        let x = design_from_gram(&example_gram(0.05));
        let reports = implication_checks(&x, 4, 1.0).unwrap();
        let ir = &reports[2];
        assert_abs_diff_eq!(ir.meta["theta"], 0.2, epsilon = 1e-9);
        assert_abs_diff_eq!(ir.value, 0.64, epsilon = 1e-9);
        assert!(ir.satisfied, "compatibility {}", ir.meta["compatibility"]);
    }

    #[test]
    fn implication_checks_example_design_critical_rho() {
        let x = design_from_gram(&example_gram(0.5));
        let reports = implication_checks(&x, 4, 3.0).unwrap();
        assert!(!reports[0].satisfied, "rip gate must fail");
        assert!(!reports[1].satisfied, "mip gate must fail");
    }

    #[test]
    fn witnesses_reproduce_reported_values() {
        let x = design_from_gram(&example_gram(0.3));
        let s = Support::new(vec![1, 2, 3, 4], 5).unwrap();
        let sigma = gram(&x);
        for (report, kind) in [
            (
                compatibility_constant(&x, &ConeSpec::new(s.clone(), 2.0).unwrap()).unwrap(),
                ConeConstant::Compatibility,
            ),
            (
                restricted_eigenvalue_at(&x, &s, 2.0).unwrap(),
                ConeConstant::Restricted,
            ),
            (
                strong_restricted_eigenvalue_at(&x, &s, 2.0).unwrap(),
                ConeConstant::StrongRestricted,
            ),
            (
                adaptive_restricted_eigenvalue_at(&x, &s, 2.0).unwrap(),
                ConeConstant::AdaptiveRestricted,
            ),
        ] {
            let program = ConeProgram::new(sigma.matrix(), &s, 2.0, kind).unwrap();
            let witness = DVector::from_vec(report.witness.clone().unwrap());
            let replayed = program.objective(&witness);
            assert!(
                (replayed - report.value).abs() <= 1e-6 * report.value.abs().max(1e-12),
                "{}: replayed {} reported {}",
                report.name,
                replayed,
                report.value
            );
        }
    }
}
