//! Optimal objective values for LASSO instances.

use saddle_core::prox::prox_l1;
use saddle_core::solvers::{default_config, run};
use saddle_core::vector::dist;
use saddle_core::{Algorithm, SaddleProblem, Termination};

use crate::config::ReferenceMode;
use crate::error::BenchError;

/// Gradient-mapping tolerance of the ISTA oracle.
pub const ISTA_TOL: f64 = 1e-10;
/// Iteration cap of the ISTA oracle.
pub const ISTA_MAX_ITER: usize = 5_000_000;

/// Proximal gradient descent with step `1 / L^2` from `x = 0`, stopped once
/// `||x - Prox(x - t grad)|| / t <= tol`. Returns `(phi*, x*)`.
pub fn ista(
    problem: &SaddleProblem,
    l: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(f64, Vec<f64>), BenchError> {
    let (b, lambda) = problem
        .lasso_data()
        .ok_or_else(|| BenchError::Config("ISTA reference needs a LASSO problem".into()))?;
    if !(l > 0.0) {
        return Err(BenchError::Reference(format!(
            "operator norm must be positive, got {l}"
        )));
    }
    let t = 1.0 / (l * l);
    let (m, n) = (problem.rows(), problem.cols());
    let mut x = vec![0.0; n];
    let mut residual = vec![0.0; m];
    let mut grad = vec![0.0; n];
    let mut trial = vec![0.0; n];
    for _ in 0..max_iter {
        problem.k.apply_into(&x, &mut residual);
        for (r, bi) in residual.iter_mut().zip(b) {
            *r -= bi;
        }
        problem.k.apply_transpose_into(&residual, &mut grad);
        for j in 0..n {
            trial[j] = x[j] - t * grad[j];
        }
        let next = prox_l1(t, lambda, &trial).map_err(|e| BenchError::Reference(e.to_string()))?;
        let mapping = dist(&x, &next) / t;
        x = next;
        if mapping <= tol {
            let phi = problem.objective(&x)?;
            return Ok((phi, x));
        }
    }
    Err(BenchError::Reference(format!(
        "ISTA did not reach gradient-mapping norm {tol:e} within {max_iter} iterations; increase the budget"
    )))
}

/// Minimum objective along an NPDAL run of `iterations` steps with the
/// default settings.
pub fn long_run(problem: &SaddleProblem, l: f64, iterations: usize) -> Result<f64, BenchError> {
    let mut cfg = default_config(Algorithm::Npdal, problem, l)?;
    cfg.max_iter = iterations;
    let mut plain = problem.clone();
    plain.reference_value = None;
    let trace = run(&plain, &cfg, &plain.x0, &plain.y0)?;
    if trace.terminated_by == Termination::Error {
        return Err(BenchError::Reference(format!(
            "long run failed: {}",
            trace.error.unwrap_or_default()
        )));
    }
    Ok(trace
        .records
        .iter()
        .map(|r| r.metric)
        .fold(f64::INFINITY, f64::min))
}

/// Reference value `phi*` for `mode`; `budget` is the benchmark iteration
/// budget (the long run uses ten times as many steps).
pub fn compute_reference(
    problem: &SaddleProblem,
    mode: ReferenceMode,
    l: f64,
    budget: usize,
) -> Result<Option<f64>, BenchError> {
    if mode == ReferenceMode::None {
        return Ok(None);
    }
    if problem.lasso_data().is_none() {
        return Err(BenchError::Config(
            "reference values apply to LASSO problems only".into(),
        ));
    }
    let mut best = f64::INFINITY;
    if matches!(mode, ReferenceMode::OracleIsta | ReferenceMode::Both) {
        best = best.min(ista(problem, l, ISTA_TOL, ISTA_MAX_ITER)?.0);
    }
    if matches!(mode, ReferenceMode::LongRun | ReferenceMode::Both) {
        best = best.min(long_run(problem, l, budget.saturating_mul(10))?);
    }
    Ok(Some(best))
}
