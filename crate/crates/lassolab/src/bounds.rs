//! Error-bound machinery: penalty selection, the stochastic term and the
//! good event, cone membership of solver errors, loss functions, the four
//! prediction/estimation bound cells (noiseless and noisy columns), and
//! support-recovery checks.
//!
//! The probabilistic guarantees only hold on the good event, where the
//! penalty dominates the stochastic term by the factor c; outcomes record
//! that flag instead of asserting bounds unconditionally.

use std::collections::BTreeMap;

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::conditions::{
    compatibility_constant, strong_restricted_eigenvalue_at, ConeSpec,
};
use crate::error::{Error, Result};
use crate::model::{
    gram, min_eigen, partition_gram, support_of, CoefVector, DesignMatrix, Support, SUPPORT_TOL,
};
use crate::solver::{solve_lasso, LassoProblem, LassoSolution, SolverOptions};

/// Gaussian noise level and the seed that generates it.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct NoiseModel {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(Error::InvalidArgument("noise level must be nonnegative".into()));
        }
        Ok(NoiseModel { sigma, seed })
    }
}

/// Penalty selection rule: the overrule multiplier c > 1 and the tail
/// exponent tau > 2 entering lambda = 2 sigma sqrt(tau log p / n).
///
/// The default tau is large enough that, at desk-scale ensembles
/// (n = 100, p = 200), the good event lambda >= c * stochastic term occurs
/// with frequency well above 0.95.
#[derive(Clone, Copy, Debug, serde::Serialize, serde::Deserialize)]
pub struct LambdaRule {
    pub c: f64,
    pub tau: f64,
}

impl Default for LambdaRule {
    fn default() -> Self {
        LambdaRule { c: 2.0, tau: 12.0 }
    }
}

impl LambdaRule {
    pub fn new(c: f64, tau: f64) -> Result<Self> {
        if !(c > 1.0) {
            return Err(Error::InvalidArgument("overrule multiplier must exceed 1".into()));
        }
        if !(tau > 2.0) {
            return Err(Error::InvalidArgument("tail exponent must exceed 2".into()));
        }
        Ok(LambdaRule { c, tau })
    }
}

/// lambda = 2 sigma sqrt(tau log p / n).
pub fn lambda_universal(sigma: f64, n: usize, p: usize, tau: f64) -> Result<f64> {
    if p < 2 {
        return Err(Error::InvalidArgument(
            "penalty rule needs at least two predictors".into(),
        ));
    }
    if n < 1 {
        return Err(Error::InvalidArgument("need at least one observation".into()));
    }
    if !(tau > 2.0) {
        return Err(Error::InvalidArgument("tail exponent must exceed 2".into()));
    }
    if !(sigma >= 0.0) {
        return Err(Error::InvalidArgument("noise level must be nonnegative".into()));
    }
    Ok(2.0 * sigma * (tau * (p as f64).ln() / n as f64).sqrt())
}

/// Cone opening L = (c + 1) / (c - 1) for the overrule multiplier c.
pub fn cone_parameter(c: f64) -> Result<f64> {
    if !(c > 1.0) {
        return Err(Error::InvalidArgument("overrule multiplier must exceed 1".into()));
    }
    Ok((c + 1.0) / (c - 1.0))
}

/// The stochastic term 2 max_j |x_j' eps| / n that the penalty must
/// dominate.
pub fn stochastic_term(x: &DesignMatrix, eps: &[f64]) -> f64 {
    let e = DVector::from_column_slice(eps);
    let corr = x.entries().transpose() * e / x.n() as f64;
    2.0 * corr.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// The fundamental optimality comparison between a solver output and the
/// truth; returns false when the inequality is violated beyond 1e-9.
pub fn basic_inequality_check(
    x: &DesignMatrix,
    y: &[f64],
    beta_hat: &CoefVector,
    beta0: &CoefVector,
    lambda: f64,
) -> bool {
    let n = x.n() as f64;
    let b_hat = beta_hat.as_dvector();
    let b0 = beta0.as_dvector();
    let eps = DVector::from_column_slice(y) - x.apply(&b0);
    let fit = x.apply(&b_hat) - x.apply(&b0);
    let lhs = fit.norm_squared() / n + lambda * beta_hat.values().iter().map(|v| v.abs()).sum::<f64>();
    let cross = 2.0 * eps.dot(&fit) / n;
    let rhs = cross + lambda * beta0.values().iter().map(|v| v.abs()).sum::<f64>();
    lhs <= rhs + 1e-9
}

/// True when ||delta_Sc||_1 <= L ||delta_S||_1 + 1e-9.
pub fn cone_membership(delta: &[f64], support: &Support, l: f64) -> bool {
    let on: f64 = support.zero_based().iter().map(|&j| delta[j].abs()).sum();
    let off: f64 = support
        .complement_zero_based()
        .iter()
        .map(|&j| delta[j].abs())
        .sum();
    off <= l * on + 1e-9
}

/// Prediction, l1 and squared-l2 estimation losses, and the 0/1 sign-support
/// selection loss.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct Losses {
    pub pred: f64,
    pub l1: f64,
    pub l2sq: f64,
    pub selection: u8,
}

pub fn losses(x: &DesignMatrix, beta_hat: &CoefVector, beta0: &CoefVector) -> Losses {
    let b_hat = beta_hat.as_dvector();
    let b0 = beta0.as_dvector();
    let pred = (x.apply(&b_hat) - x.apply(&b0)).norm_squared() / x.n() as f64;
    let mut l1 = 0.0;
    let mut l2sq = 0.0;
    let mut signs_match = true;
    for j in 0..beta_hat.len() {
        let d = b_hat[j] - b0[j];
        l1 += d.abs();
        l2sq += d * d;
        // sign(0) = 0 exactly; f64::signum treats zero as signed
        let hat_sign = if b_hat[j].abs() <= SUPPORT_TOL {
            0
        } else if b_hat[j] > 0.0 {
            1
        } else {
            -1
        };
        let true_sign = if b0[j] > 0.0 {
            1
        } else if b0[j] < 0.0 {
            -1
        } else {
            0
        };
        if hat_sign != true_sign {
            signs_match = false;
        }
    }
    Losses {
        pred,
        l1,
        l2sq,
        selection: if signs_match { 0 } else { 1 },
    }
}

/// One bound cell before an empirical loss is attached.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BoundSkeleton {
    pub bound_name: String,
    pub theoretical: f64,
    pub applicable: bool,
    pub phi_used: Option<f64>,
}

/// A bound cell compared against its empirical loss.
#[derive(Clone, Debug, serde::Serialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub theoretical: f64,
    pub empirical: f64,
    pub holds: bool,
    pub applicable: bool,
    pub lambda_used: f64,
    pub phi_used: Option<f64>,
    pub meta: BTreeMap<String, f64>,
}

/// The four bound cells of the noiseless or noisy column.
///
/// Noiseless: lambda ||b0||_1, lambda^2 s / comp, 2 lambda s / comp,
/// s lambda^2 / str^2. Noisy: 3 lambda / 2 ||b0||_1, 9 lambda^2 s / (4 comp),
/// 4 lambda s / comp, 9 lambda^2 s / (4 str^2), where comp and str are the
/// squared compatibility and strong restricted eigenvalue constants.
/// Cells whose constant is nonpositive come back marked not applicable.
pub fn table1_bounds(
    lambda: f64,
    s: usize,
    phi_comp_sq: f64,
    phi_str_sq: f64,
    beta0_l1: f64,
    noisy: bool,
) -> Vec<BoundSkeleton> {
    let s = s as f64;
    let comp_ok = phi_comp_sq > 0.0;
    let str_ok = phi_str_sq > 0.0;
    let (slow, fast, l1, l2) = if noisy {
        (
            1.5 * lambda * beta0_l1,
            2.25 * lambda * lambda * s / phi_comp_sq,
            4.0 * lambda * s / phi_comp_sq,
            2.25 * lambda * lambda * s / (phi_str_sq * phi_str_sq),
        )
    } else {
        (
            lambda * beta0_l1,
            lambda * lambda * s / phi_comp_sq,
            2.0 * lambda * s / phi_comp_sq,
            lambda * lambda * s / (phi_str_sq * phi_str_sq),
        )
    };
    vec![
        BoundSkeleton {
            bound_name: "pred_slow".into(),
            theoretical: slow,
            applicable: true,
            phi_used: None,
        },
        BoundSkeleton {
            bound_name: "pred_fast".into(),
            theoretical: if comp_ok { fast } else { 0.0 },
            applicable: comp_ok,
            phi_used: Some(phi_comp_sq),
        },
        BoundSkeleton {
            bound_name: "est_l1".into(),
            theoretical: if comp_ok { l1 } else { 0.0 },
            applicable: comp_ok,
            phi_used: Some(phi_comp_sq),
        },
        BoundSkeleton {
            bound_name: "est_l2sq".into(),
            theoretical: if str_ok { l2 } else { 0.0 },
            applicable: str_ok,
            phi_used: Some(phi_str_sq),
        },
    ]
}

fn finish_bound(skeleton: BoundSkeleton, empirical: f64, lambda: f64) -> BoundReport {
    let holds = !skeleton.applicable || empirical <= skeleton.theoretical + 1e-9;
    BoundReport {
        bound_name: skeleton.bound_name,
        theoretical: skeleton.theoretical,
        empirical,
        holds,
        applicable: skeleton.applicable,
        lambda_used: lambda,
        phi_used: skeleton.phi_used,
        meta: BTreeMap::new(),
    }
}

/// Everything recorded about one solved replication.
#[derive(Clone, Debug, serde::Serialize)]
pub struct VerifyOutcome {
    pub lambda: f64,
    pub stochastic: f64,
    pub good_event: bool,
    pub cone_l: f64,
    pub cone_holds: bool,
    pub basic_inequality_holds: bool,
    pub solution_l1: f64,
    pub converged: bool,
    pub losses: Losses,
    pub bounds: Vec<BoundReport>,
    #[serde(skip)]
    pub solution: CoefVector,
}

/// Solves one replication with everything precomputed and scores the bound
/// cells. The caller supplies the noise draw, the penalty, and the squared
/// compatibility and strong restricted eigenvalue constants for the cone.
#[allow(clippy::too_many_arguments)]
pub fn verify_replication(
    x: &DesignMatrix,
    beta0: &CoefVector,
    eps: &[f64],
    lambda: f64,
    rule_c: f64,
    cone: &ConeSpec,
    phi_comp_sq: f64,
    phi_str_sq: f64,
    noisy: bool,
    opts: &SolverOptions,
) -> Result<VerifyOutcome> {
    let b0 = beta0.as_dvector();
    let y: Vec<f64> = (x.apply(&b0) + DVector::from_column_slice(eps))
        .iter()
        .copied()
        .collect();
    let problem = LassoProblem::new(x.clone(), y.clone(), lambda)?;
    let solution: LassoSolution = solve_lasso(&problem, opts)?;

    let stochastic = stochastic_term(x, eps);
    let good_event = lambda >= rule_c * stochastic;
    let delta: Vec<f64> = solution
        .beta
        .values()
        .iter()
        .zip(beta0.values())
        .map(|(a, b)| a - b)
        .collect();
    let cone_holds = cone_membership(&delta, &cone.support, cone.l);
    let basic = basic_inequality_check(x, &y, &solution.beta, beta0, lambda);
    let loss = losses(x, &solution.beta, beta0);

    let beta0_l1: f64 = beta0.values().iter().map(|v| v.abs()).sum();
    let skeletons = table1_bounds(
        lambda,
        cone.support.len(),
        phi_comp_sq,
        phi_str_sq,
        beta0_l1,
        noisy,
    );
    let bounds = skeletons
        .into_iter()
        .map(|sk| {
            let empirical = match sk.bound_name.as_str() {
                "pred_slow" | "pred_fast" => loss.pred,
                "est_l1" => loss.l1,
                _ => loss.l2sq,
            };
            finish_bound(sk, empirical, lambda)
        })
        .collect();

    Ok(VerifyOutcome {
        lambda,
        stochastic,
        good_event,
        cone_l: cone.l,
        cone_holds,
        basic_inequality_holds: basic,
        solution_l1: solution.beta.values().iter().map(|v| v.abs()).sum(),
        converged: solution.converged,
        losses: loss,
        bounds,
        solution: solution.beta,
    })
}

fn cone_constants(x: &DesignMatrix, cone: &ConeSpec) -> Result<(f64, f64)> {
    let comp = compatibility_constant(x, cone)?.value;
    let strong = strong_restricted_eigenvalue_at(x, &cone.support, cone.l)?.value;
    Ok((comp, strong))
}

/// Draws one noisy replication under the noise model, picks the penalty by
/// the rule, solves, and scores every bound cell.
pub fn verify_bounds(
    x: &DesignMatrix,
    beta0: &CoefVector,
    noise: &NoiseModel,
    rule: &LambdaRule,
    cone: &ConeSpec,
) -> Result<VerifyOutcome> {
    let lambda = lambda_universal(noise.sigma, x.n(), x.p(), rule.tau)?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let eps: Vec<f64> = (0..x.n())
        .map(|_| noise.sigma * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let (comp, strong) = cone_constants(x, cone)?;
    verify_replication(
        x,
        beta0,
        &eps,
        lambda,
        rule.c,
        cone,
        comp,
        strong,
        true,
        &SolverOptions::default(),
    )
}

/// The noiseless path: no noise draw, the caller's penalty, noiseless bound
/// cells.
pub fn verify_bounds_noiseless(
    x: &DesignMatrix,
    beta0: &CoefVector,
    lambda: f64,
    cone: &ConeSpec,
) -> Result<VerifyOutcome> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument("penalty must be positive".into()));
    }
    let eps = vec![0.0; x.n()];
    let (comp, strong) = cone_constants(x, cone)?;
    verify_replication(
        x,
        beta0,
        &eps,
        lambda,
        2.0,
        cone,
        comp,
        strong,
        false,
        &SolverOptions::default(),
    )
}

/// Outcome of a noiseless support-recovery run at one penalty level.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RecoveryReport {
    /// Whether the selected support is contained in the true one.
    pub subset_of_support: bool,
    /// lambda * sup over sign vertices of ||Sigma_11^{-1} tau||_inf / 2.
    pub linf_bound: f64,
    /// Whether the on-support sup-norm error respects `linf_bound`.
    pub linf_ok: bool,
    /// Magnitudes above this threshold cannot be dropped by the solver.
    pub betamin_threshold: f64,
    /// 1-based indices the solver selected.
    pub selected: Vec<usize>,
}

/// Solves the noiseless instance and checks the no-false-positive and
/// sup-norm claims that irrepresentability buys.
pub fn support_recovery_check(
    x: &DesignMatrix,
    beta0: &CoefVector,
    lambda: f64,
) -> Result<RecoveryReport> {
    let s0 = support_of(beta0, 0.0);
    if !s0.is_proper_nonempty() {
        return Err(Error::InvalidArgument(
            "true support must be nonempty and proper".into(),
        ));
    }
    if s0.len() > 20 {
        return Err(Error::Refusal(format!(
            "support of size {} requires 2^{} sign vertices",
            s0.len(),
            s0.len()
        )));
    }
    let sigma = gram(x);
    let part = partition_gram(&sigma, &s0)?;
    let lam_min = min_eigen(&part.support_block)?;
    if lam_min <= 1e-10 {
        return Err(Error::Precondition(format!(
            "the support block of the Gram matrix must have a positive smallest eigenvalue; got {lam_min:.3e}"
        )));
    }
    let inv = part
        .support_block
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Precondition("support block is not invertible".into()))?;

    let s = s0.len();
    let mut sup = 0.0f64;
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
        let image = &inv * DVector::from_column_slice(&tau);
        sup = sup.max(image.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    let linf_bound = lambda * sup / 2.0;

    let solution = crate::solver::solve_noiseless_lasso(x, beta0, lambda, &SolverOptions::default())?;
    let selected = support_of(&solution.beta, SUPPORT_TOL);
    let subset = s0.contains_support(&selected);
    let linf_err = s0
        .zero_based()
        .iter()
        .map(|&j| (solution.beta.values()[j] - beta0.values()[j]).abs())
        .fold(0.0f64, f64::max);

    Ok(RecoveryReport {
        subset_of_support: subset,
        linf_bound,
        linf_ok: linf_err <= linf_bound + 1e-8,
        betamin_threshold: linf_bound,
        selected: selected.indices().to_vec(),
    })
}

/// Empirical versus exact mean prediction error of least squares under
/// Gaussian noise on a fixed full-rank design.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct OlsPredictionCheck {
    pub empirical_mean: f64,
    pub theoretical: f64,
}

pub fn ols_prediction_check(
    p: usize,
    n: usize,
    sigma: f64,
    reps: usize,
    seed: u64,
) -> Result<OlsPredictionCheck> {
    if p >= n {
        return Err(Error::InvalidArgument(
            "needs fewer predictors than observations".into(),
        ));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument("need at least one replication".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DesignMatrix::new(nalgebra::DMatrix::from_fn(n, p, |_, _| {
        rng.sample::<f64, _>(StandardNormal)
    }))?;
    // hat matrix applied through a reused decomposition
    let svd = x.entries().clone().svd(true, true);
    let mut total = 0.0;
    for rep in 0..reps {
        let mut noise_rng = ChaCha8Rng::seed_from_u64(seed);
        noise_rng.set_stream(rep as u64 + 1);
        let eps = DVector::from_fn(n, |_, _| sigma * noise_rng.sample::<f64, _>(StandardNormal));
        let beta = svd
            .solve(&eps, 1e-12)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        total += x.apply(&beta).norm_squared() / n as f64;
    }
    Ok(OlsPredictionCheck {
        empirical_mean: total / reps as f64,
        theoretical: sigma * sigma * p as f64 / n as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    #[test]
    fn lambda_rule_formula_and_scalings() {
        let l = lambda_universal(1.0, 100, 100, 2.5).unwrap();
        assert_abs_diff_eq!(l, 0.6786, epsilon = 1e-4);
        // direct re-evaluation
        assert_abs_diff_eq!(l, 2.0 * (2.5 * (100.0f64).ln() / 100.0).sqrt(), epsilon = 1e-15);
        // linear in sigma
        assert_abs_diff_eq!(lambda_universal(2.0, 100, 100, 2.5).unwrap(), 2.0 * l);
        // halves when n quadruples
        assert_abs_diff_eq!(
            lambda_universal(1.0, 400, 100, 2.5).unwrap(),
            l / 2.0,
            epsilon = 1e-15
        );
        assert!(lambda_universal(1.0, 100, 1, 2.5).is_err());
        assert!(lambda_universal(1.0, 100, 100, 2.0).is_err());
    }

    #[test]
    fn cone_parameter_values() {
        assert_abs_diff_eq!(cone_parameter(2.0).unwrap(), 3.0);
        assert_abs_diff_eq!(cone_parameter(3.0).unwrap(), 2.0);
        assert!(cone_parameter(10.0).unwrap() < cone_parameter(5.0).unwrap());
        assert!(cone_parameter(1.0).is_err());
    }

    #[test]
    fn stochastic_term_cases() {
        let x = DesignMatrix::new(DMatrix::identity(3, 3)).unwrap();
        assert_eq!(stochastic_term(&x, &[0.0, 0.0, 0.0]), 0.0);
        assert_abs_diff_eq!(stochastic_term(&x, &[1.0, 0.0, 0.0]), 2.0 / 3.0);

        // loop oracle on a random instance
        let rows: Vec<Vec<f64>> = (0..7)
            .map(|i| (0..4).map(|j| ((i * 3 + j) as f64 * 0.7).sin()).collect())
            .collect();
        let x = DesignMatrix::from_rows(&rows).unwrap();
        let eps: Vec<f64> = (0..7).map(|i| (i as f64 * 1.3).cos()).collect();
        let mut oracle = 0.0f64;
        for j in 0..4 {
            let mut dot = 0.0;
            for i in 0..7 {
                dot += rows[i][j] * eps[i];
            }
            oracle = oracle.max((2.0 * dot / 7.0).abs());
        }
        assert_abs_diff_eq!(stochastic_term(&x, &eps), oracle, epsilon = 1e-14);
    }

    #[test]
    fn table_cells_match_hand_arithmetic() {
        let noisy = table1_bounds(0.1, 4, 1.0, 1.0, 4.0, true);
        let values: Vec<f64> = noisy.iter().map(|b| b.theoretical).collect();
        assert_abs_diff_eq!(values[0], 0.6, epsilon = 1e-12);
        assert_abs_diff_eq!(values[1], 0.09, epsilon = 1e-12);
        assert_abs_diff_eq!(values[2], 1.6, epsilon = 1e-12);
        assert_abs_diff_eq!(values[3], 0.09, epsilon = 1e-12);

        let clean = table1_bounds(0.1, 4, 1.0, 1.0, 4.0, false);
        let values: Vec<f64> = clean.iter().map(|b| b.theoretical).collect();
        assert_abs_diff_eq!(values[0], 0.4, epsilon = 1e-12);
        assert_abs_diff_eq!(values[1], 0.04, epsilon = 1e-12);
        assert_abs_diff_eq!(values[2], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(values[3], 0.04, epsilon = 1e-12);

        let zero = table1_bounds(0.0, 4, 1.0, 1.0, 4.0, true);
        assert!(zero.iter().all(|b| b.theoretical == 0.0));

        let degenerate = table1_bounds(0.1, 4, 0.0, 1.0, 4.0, true);
        assert!(!degenerate[1].applicable);
        assert!(!degenerate[2].applicable);
        assert!(degenerate[3].applicable);
    }

    #[test]
    fn basic_inequality_on_truth_and_on_garbage() {
        let x = DesignMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let beta0 = CoefVector::new(vec![1.0, -1.0]).unwrap();
        let y: Vec<f64> = x.apply(&beta0.as_dvector()).iter().copied().collect();
        // beta_hat = beta0: both sides equal lambda ||beta0||_1
        assert!(basic_inequality_check(&x, &y, &beta0, &beta0, 0.3));
        // a deliberately suboptimal candidate violates it
        let bad = CoefVector::new(vec![4.0, -1.0]).unwrap();
        assert!(!basic_inequality_check(&x, &y, &bad, &beta0, 0.3));
    }

    #[test]
    fn cone_membership_inside_support() {
        let s = Support::new(vec![1, 2], 4).unwrap();
        assert!(cone_membership(&[1.0, -2.0, 0.0, 0.0], &s, 0.5));
        assert!(!cone_membership(&[0.1, 0.0, 5.0, 0.0], &s, 1.0));
    }

    #[test]
    fn losses_cases() {
        let x = DesignMatrix::new(DMatrix::identity(3, 3)).unwrap();
        let beta0 = CoefVector::new(vec![1.0, -1.0, 0.0]).unwrap();
        let same = losses(&x, &beta0, &beta0);
        assert_eq!(same.selection, 0);
        assert_eq!(same.pred, 0.0);
        assert_eq!(same.l1, 0.0);

        let flipped = CoefVector::new(vec![1.0, 1.0, 0.0]).unwrap();
        let l = losses(&x, &flipped, &beta0);
        assert_eq!(l.selection, 1);
        assert!(l.pred > 0.0 && l.l1 > 0.0 && l.l2sq > 0.0);

        // element-wise oracle on a random pair
        let a = CoefVector::new(vec![0.4, -0.2, 1.1]).unwrap();
        let l = losses(&x, &a, &beta0);
        let diffs: [f64; 3] = [0.4 - 1.0, -0.2 + 1.0, 1.1];
        let l1: f64 = diffs.iter().map(|d| d.abs()).sum();
        let l2: f64 = diffs.iter().map(|d| d * d).sum();
        assert_abs_diff_eq!(l.l1, l1, epsilon = 1e-12);
        assert_abs_diff_eq!(l.l2sq, l2, epsilon = 1e-12);
        // identity design with n = p: pred = l2sq / n
        assert_abs_diff_eq!(l.pred, l2 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn ols_prediction_formula() {
        let check = ols_prediction_check(1, 4, 2.0, 200, 7).unwrap();
        assert_abs_diff_eq!(check.theoretical, 1.0);
        let zero = ols_prediction_check(2, 10, 0.0, 5, 7).unwrap();
        assert_eq!(zero.theoretical, 0.0);
        assert_eq!(zero.empirical_mean, 0.0);
        assert!(ols_prediction_check(5, 5, 1.0, 10, 7).is_err());
    }

    #[test]
    fn noiseless_verify_on_orthonormal_design() {
        // closed form: each coordinate shrinks by lambda/2, so the slow
        // bound lambda ||beta0||_1 dominates the prediction loss
        let p = 6;
        let x = DesignMatrix::new(DMatrix::identity(p, p) * (p as f64).sqrt()).unwrap();
        let beta0 = CoefVector::new(vec![1.0, -2.0, 0.5, 0.0, 0.0, 0.0]).unwrap();
        let cone = ConeSpec::new(Support::new(vec![1, 2, 3], p).unwrap(), 1.0).unwrap();
        let lambda = 0.6;
        let outcome = verify_bounds_noiseless(&x, &beta0, lambda, &cone).unwrap();
        // prediction loss is the sum of min(lambda/2, |b|)^2
        let expect: f64 = beta0
            .values()
            .iter()
            .map(|b| b.abs().min(lambda / 2.0).powi(2))
            .sum();
        assert_abs_diff_eq!(outcome.losses.pred, expect, epsilon = 1e-9);
        assert!(outcome.bounds.iter().all(|b| b.holds));
        assert!(outcome.cone_holds);
        assert!(outcome.basic_inequality_holds);
        // l1 contraction of the noiseless solution
        let beta0_l1: f64 = beta0.values().iter().map(|v| v.abs()).sum();
        assert!(outcome.solution_l1 <= beta0_l1 + 1e-9);
    }

    #[test]
    fn sigma_zero_noisy_path_degenerates() {
        let x = DesignMatrix::from_rows(&[
            vec![1.0, 0.2, -0.4],
            vec![0.3, -1.0, 0.5],
            vec![-0.7, 0.4, 1.0],
            vec![0.2, 0.8, -0.3],
        ])
        .unwrap();
        let beta0 = CoefVector::new(vec![1.0, 0.0, 0.0]).unwrap();
        let cone = ConeSpec::new(Support::new(vec![1], 3).unwrap(), 3.0).unwrap();
        let noise = NoiseModel::new(0.0, 5).unwrap();
        let outcome = verify_bounds(&x, &beta0, &noise, &LambdaRule::default(), &cone).unwrap();
        assert_eq!(outcome.lambda, 0.0);
        assert_eq!(outcome.stochastic, 0.0);
        assert!(outcome.good_event);
        assert!(outcome.losses.pred <= 1e-9);
        assert!(outcome.bounds.iter().all(|b| b.holds));
    }

    #[test]
    fn recovery_check_on_example_design() {
        // rho = 0.1: irrepresentability holds, lambda = 0.2 keeps every
        // active coordinate at 0.9 and the redundant one at zero
        let g = crate::testkit::example_gram(0.1);
        let x = crate::testkit::design_from_gram(&g);
        let beta0 = CoefVector::new(vec![1.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        let report = support_recovery_check(&x, &beta0, 0.2).unwrap();
        assert!(report.subset_of_support);
        assert!(report.linf_ok);
        assert_abs_diff_eq!(report.linf_bound, 0.1, epsilon = 1e-9);
    }

    #[test]
    fn recovery_check_orthonormal_exact_signs() {
        let p = 5;
        let x = DesignMatrix::new(DMatrix::identity(p, p) * (p as f64).sqrt()).unwrap();
        let beta0 = CoefVector::new(vec![1.0, -0.8, 0.0, 0.0, 0.0]).unwrap();
        // any penalty below 2 min |beta0_j| keeps all active coordinates
        let report = support_recovery_check(&x, &beta0, 0.5).unwrap();
        assert!(report.subset_of_support);
        assert!(report.linf_ok);
        assert_eq!(report.selected, vec![1, 2]);
    }
}
