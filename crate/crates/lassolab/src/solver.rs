//! Penalized least-squares solvers.
//!
//! Everything minimizes the one objective (1/n)||Y - X beta||_2^2 +
//! lambda ||beta||_1. The workhorse is cyclic coordinate descent: the
//! per-coordinate subproblem is solved exactly by a soft threshold, sweeps
//! visit coordinates in ascending order, and the residual is maintained
//! incrementally with a periodic full refresh to cap drift. Basis pursuit is
//! reached by driving lambda to zero along a warm-started continuation.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::model::{soft_threshold_unchecked, CoefVector, DesignMatrix};

/// A penalized least-squares instance: design, response, penalty level.
#[derive(Clone, Debug)]
pub struct LassoProblem {
    x: DesignMatrix,
    y: DVector<f64>,
    lambda: f64,
}

impl LassoProblem {
    pub fn new(x: DesignMatrix, y: Vec<f64>, lambda: f64) -> Result<Self> {
        if y.len() != x.n() {
            return Err(Error::InvalidArgument(format!(
                "response length {} does not match {} rows",
                y.len(),
                x.n()
            )));
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("response has a non-finite entry".into()));
        }
        if !(lambda >= 0.0) {
            return Err(Error::InvalidArgument("penalty level must be nonnegative".into()));
        }
        Ok(LassoProblem {
            x,
            y: DVector::from_vec(y),
            lambda,
        })
    }

    pub fn design(&self) -> &DesignMatrix {
        &self.x
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn objective(&self, beta: &DVector<f64>) -> f64 {
        let r = &self.y - self.x.apply(beta);
        r.norm_squared() / self.x.n() as f64 + self.lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
    }
}

/// Iteration controls. `tol` is the sup-norm stopping rule on coordinate
/// updates within one sweep; `kkt_tol` is the stationarity slack used when
/// certifying solutions.
#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub tol: f64,
    pub kkt_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iters: 100_000,
            tol: 1e-10,
            kkt_tol: 1e-7,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.tol > 0.0) || !(self.kkt_tol > 0.0) {
            return Err(Error::InvalidArgument(
                "solver options must all be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A solved instance: the coefficients, the attained objective, the largest
/// stationarity violation, and whether the stopping rule fired.
#[derive(Clone, Debug)]
pub struct LassoSolution {
    pub beta: CoefVector,
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Stationarity violations split by active and inactive coordinates.
#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct KktReport {
    pub max_inactive_violation: f64,
    pub max_active_violation: f64,
    pub satisfied: bool,
}

/// Checks the stationarity system for a candidate solution: every inactive
/// gradient must stay inside [-lambda, lambda] and every active gradient
/// must sit at lambda times the coefficient sign.
pub fn kkt_report(
    x: &DesignMatrix,
    y: &[f64],
    beta: &CoefVector,
    lambda: f64,
    kkt_tol: f64,
) -> KktReport {
    let n = x.n() as f64;
    let b = beta.as_dvector();
    let r = DVector::from_column_slice(y) - x.apply(&b);
    let grad = x.entries().transpose() * &r * (2.0 / n);
    let mut inactive: f64 = 0.0;
    let mut active: f64 = 0.0;
    for j in 0..x.p() {
        let bj = beta.values()[j];
        if bj == 0.0 {
            inactive = inactive.max(grad[j].abs() - lambda).max(0.0);
        } else {
            active = active.max((grad[j] - lambda * bj.signum()).abs());
        }
    }
    KktReport {
        max_inactive_violation: inactive,
        max_active_violation: active,
        satisfied: inactive <= kkt_tol && active <= kkt_tol,
    }
}

/// Cyclic coordinate descent for the penalized objective. Zero columns keep
/// a zero coefficient and are skipped. Non-convergence is not an error: the
/// solution comes back with `converged = false` and the caller decides.
pub fn solve_lasso(problem: &LassoProblem, opts: &SolverOptions) -> Result<LassoSolution> {
    opts.validate()?;
    let x = problem.design();
    let n = x.n() as f64;
    let p = x.p();
    let lambda = problem.lambda();

    let col_sq: Vec<f64> = (0..p).map(|j| x.entries().column(j).norm_squared()).collect();
    let active_cols: Vec<usize> = (0..p).filter(|&j| col_sq[j] > 0.0).collect();

    let mut beta = DVector::zeros(p);
    let mut residual = problem.response().clone();
    let mut sweeps = 0usize;
    let mut converged = false;
    #[cfg(debug_assertions)]
    let mut last_objective = f64::INFINITY;

    while sweeps < opts.max_iters {
        let mut max_update: f64 = 0.0;
        for &j in &active_cols {
            let col = x.entries().column(j);
            let grad = col.dot(&residual);
            let candidate = beta[j] + grad / col_sq[j];
            let threshold = n * lambda / (2.0 * col_sq[j]);
            let new = soft_threshold_unchecked(candidate, threshold);
            let delta: f64 = new - beta[j];
            if delta != 0.0 {
                residual.axpy(-delta, &col, 1.0);
                beta[j] = new;
            }
            max_update = max_update.max(delta.abs());
        }
        sweeps += 1;
        if sweeps % 128 == 0 {
            residual = problem.response() - x.apply(&beta);
        }
        #[cfg(debug_assertions)]
        {
            let objective = problem.objective(&beta);
            debug_assert!(
                objective <= last_objective + 1e-9 * (1.0 + last_objective.abs().min(1e12)),
                "objective rose across a sweep: {last_objective} -> {objective}"
            );
            last_objective = objective;
        }
        if max_update < opts.tol {
            converged = true;
            break;
        }
    }

    let beta = CoefVector::from_dvector(&beta);
    let report = kkt_report(
        x,
        problem.response().as_slice(),
        &beta,
        lambda,
        opts.kkt_tol,
    );
    Ok(LassoSolution {
        objective: problem.objective(&beta.as_dvector()),
        kkt_residual: report.max_inactive_violation.max(report.max_active_violation),
        iterations: sweeps,
        converged,
        beta,
    })
}

/// Solves the noiseless instance Y = X beta0 under the shared objective.
pub fn solve_noiseless_lasso(
    x: &DesignMatrix,
    beta0: &CoefVector,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<LassoSolution> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(
            "noiseless solves need a positive penalty".into(),
        ));
    }
    if beta0.len() != x.p() {
        return Err(Error::InvalidArgument(
            "true coefficient length does not match the design".into(),
        ));
    }
    let y = x.apply(&beta0.as_dvector());
    let problem = LassoProblem::new(x.clone(), y.iter().copied().collect(), lambda)?;
    solve_lasso(&problem, opts)
}

/// Minimum-l1 interpolation of Y = X beta, computed by lambda continuation:
/// solve at a geometrically decreasing penalty with warm starts until the
/// fit is feasible and the l1 norm has stabilized.
pub fn solve_bplp(x: &DesignMatrix, y: &[f64], opts: &SolverOptions) -> Result<CoefVector> {
    opts.validate()?;
    if y.len() != x.n() {
        return Err(Error::InvalidArgument(
            "response length does not match the design".into(),
        ));
    }
    let y_vec = DVector::from_column_slice(y);
    let n = x.n() as f64;
    let y_norm = y_vec.norm();

    // span check: least-squares residual must vanish
    let lstsq = x
        .entries()
        .clone()
        .svd(true, true)
        .solve(&y_vec, 1e-12)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let span_residual = (&y_vec - x.apply(&lstsq)).norm();
    if span_residual > 1e-8 * (1.0 + y_norm) {
        return Err(Error::Infeasible(format!(
            "response is not in the column span (residual {span_residual:.3e})"
        )));
    }

    let feas_tol = 1e-6 * (1.0 + y_norm);
    let mut lambda = (x.entries().transpose() * &y_vec * (2.0 / n))
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if lambda == 0.0 {
        return Ok(CoefVector::zeros(x.p()));
    }

    let mut beta = DVector::zeros(x.p());
    let mut last_l1 = f64::INFINITY;
    for _ in 0..200 {
        let mut residual = &y_vec - x.apply(&beta);
        let col_sq: Vec<f64> = (0..x.p())
            .map(|j| x.entries().column(j).norm_squared())
            .collect();
        // warm-started sweeps at this stage
        for sweep in 0..opts.max_iters {
            let mut max_update: f64 = 0.0;
            for j in 0..x.p() {
                if col_sq[j] == 0.0 {
                    continue;
                }
                let col = x.entries().column(j);
                let grad = col.dot(&residual);
                let candidate = beta[j] + grad / col_sq[j];
                let threshold = n * lambda / (2.0 * col_sq[j]);
                let new = soft_threshold_unchecked(candidate, threshold);
                let delta: f64 = new - beta[j];
                if delta != 0.0 {
                    residual.axpy(-delta, &col, 1.0);
                    beta[j] = new;
                }
                max_update = max_update.max(delta.abs());
            }
            if sweep % 128 == 127 {
                residual = &y_vec - x.apply(&beta);
            }
            if max_update < opts.tol {
                break;
            }
        }
        let l1: f64 = beta.iter().map(|b| b.abs()).sum();
        let feasible = (&y_vec - x.apply(&beta)).norm() <= feas_tol;
        if feasible && (l1 - last_l1).abs() < 1e-9 {
            return Ok(CoefVector::from_dvector(&beta));
        }
        last_l1 = l1;
        lambda *= 0.5;
    }
    Err(Error::NonConvergence(
        "continuation failed to reach the feasibility tolerance".into(),
    ))
}

/// Ordinary least squares; requires p < n and full column rank.
pub fn ols_solve(x: &DesignMatrix, y: &[f64]) -> Result<CoefVector> {
    if x.p() >= x.n() {
        return Err(Error::InvalidArgument(
            "least squares needs fewer predictors than observations".into(),
        ));
    }
    if y.len() != x.n() {
        return Err(Error::InvalidArgument(
            "response length does not match the design".into(),
        ));
    }
    let svd = x.entries().clone().svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0f64, f64::max);
    let smin = svd
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if smin <= 1e-10 * smax.max(1.0) {
        return Err(Error::InvalidArgument("design is rank deficient".into()));
    }
    let y_vec = DVector::from_column_slice(y);
    let beta = svd
        .solve(&y_vec, 0.0)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(CoefVector::from_dvector(&beta))
}
