use crate::problems::SaddleProblem;
use crate::vector::{all_finite, dist, lincomb, norm};
use crate::{Error, Result};

use super::{Algorithm, SolverConfig, SolverState};

/// One iteration of `cfg.algo`.
pub fn step(problem: &SaddleProblem, cfg: &SolverConfig, state: &mut SolverState) -> Result<()> {
    match cfg.algo {
        Algorithm::Pda => step_pda(problem, cfg, state),
        Algorithm::Grpda => step_grpda(problem, cfg, state),
        Algorithm::Npda => step_npda(problem, cfg, state),
        Algorithm::Anpda => step_anpda(problem, cfg, state),
        Algorithm::Npdal => step_npdal(problem, cfg, state),
    }
}

fn check_finite(iteration: usize, x: &[f64], y: &[f64]) -> Result<()> {
    if all_finite(x) && all_finite(y) {
        Ok(())
    } else {
        Err(Error::NonFinite { iteration })
    }
}

/// `Prox_{step h}(base - step * dir)` for the primal block.
fn primal_prox(problem: &SaddleProblem, step: f64, base: &[f64], dir: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; base.len()];
    lincomb(1.0, base, -step, dir, &mut out);
    problem.prox_g.apply_in_place(step, &mut out);
    out
}

/// `Prox_{step f*}(base + step * K xbar)` for the dual block.
fn dual_prox(problem: &SaddleProblem, step: f64, base: &[f64], k_xbar: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; base.len()];
    lincomb(1.0, base, step, k_xbar, &mut out);
    problem.prox_fstar.apply_in_place(step, &mut out);
    out
}

/// `x_new + theta (x_new - x_old)`
fn extrapolate(x_new: &[f64], x_old: &[f64], theta: f64) -> Vec<f64> {
    let mut out = vec![0.0; x_new.len()];
    lincomb(1.0 + theta, x_new, -theta, x_old, &mut out);
    out
}

fn commit(
    problem: &SaddleProblem,
    state: &mut SolverState,
    x_new: Vec<f64>,
    y_new: Vec<f64>,
    kty_new: Option<Vec<f64>>,
) -> Result<()> {
    let iteration = state.k + 1;
    check_finite(iteration, &x_new, &y_new)?;
    state.x_prev = std::mem::replace(&mut state.x, x_new);
    state.y_prev = std::mem::replace(&mut state.y, y_new);
    match kty_new {
        Some(v) => state.kty = v,
        None => problem.k.apply_transpose_into(&state.y, &mut state.kty),
    }
    state.k = iteration;
    Ok(())
}

/// Chambolle-Pock step:
/// `x+ = Prox_{tau g}(x - tau K^T y)`, `xbar = x+ + theta (x+ - x)`,
/// `y+ = Prox_{sigma f*}(y + sigma K xbar)`.
pub fn step_pda(
    problem: &SaddleProblem,
    cfg: &SolverConfig,
    state: &mut SolverState,
) -> Result<()> {
    let x_new = primal_prox(problem, cfg.tau, &state.x, &state.kty);
    let xbar = extrapolate(&x_new, &state.x, cfg.theta);
    let k_xbar = problem.k.apply(&xbar)?;
    let y_new = dual_prox(problem, cfg.sigma, &state.y, &k_xbar);
    commit(problem, state, x_new, y_new, None)
}

/// Golden-ratio step:
/// `z = ((psi - 1) x + z) / psi`, `x+ = Prox_{tau g}(z - tau K^T y)`,
/// `y+ = Prox_{sigma f*}(y + sigma K x+)`.
pub fn step_grpda(
    problem: &SaddleProblem,
    cfg: &SolverConfig,
    state: &mut SolverState,
) -> Result<()> {
    let psi = cfg.psi;
    let z_old = std::mem::take(&mut state.z);
    let mut z = vec![0.0; z_old.len()];
    lincomb((psi - 1.0) / psi, &state.x, 1.0 / psi, &z_old, &mut z);
    let x_new = primal_prox(problem, cfg.tau, &z, &state.kty);
    state.z = z;
    let kx = problem.k.apply(&x_new)?;
    let y_new = dual_prox(problem, cfg.sigma, &state.y, &kx);
    commit(problem, state, x_new, y_new, None)
}

/// Advances the aggregate points and returns the two midpoints
/// `(x_md, y_md)` for iteration `k`.
fn midpoints(cfg: &SolverConfig, state: &mut SolverState) -> (Vec<f64>, Vec<f64>) {
    let k = state.k + 1;
    let (a, b) = (cfg.a.at(k), cfg.b.at(k));

    let mut x_ag = vec![0.0; state.x.len()];
    lincomb(1.0 - a, &state.x_ag, a, &state.x, &mut x_ag);
    let mut y_ag = vec![0.0; state.y.len()];
    lincomb(1.0 - b, &state.y_ag, b, &state.y, &mut y_ag);

    let mut x_md = vec![0.0; state.x.len()];
    lincomb(1.0 - a, &state.x, a, &x_ag, &mut x_md);
    let mut y_md = vec![0.0; state.y.len()];
    lincomb(1.0 - b, &state.y, b, &y_ag, &mut y_md);

    state.x_ag = x_ag;
    state.y_ag = y_ag;
    (x_md, y_md)
}

/// NPDA sweep: aggregate points, midpoints, then a PDA-type step whose
/// proximal terms are centred at the midpoints, with `theta = 1`.
pub fn step_npda(
    problem: &SaddleProblem,
    cfg: &SolverConfig,
    state: &mut SolverState,
) -> Result<()> {
    let (x_md, y_md) = midpoints(cfg, state);
    let x_new = primal_prox(problem, cfg.tau, &x_md, &state.kty);
    let xbar = extrapolate(&x_new, &state.x, cfg.theta);
    let k_xbar = problem.k.apply(&xbar)?;
    let y_new = dual_prox(problem, cfg.sigma, &y_md, &k_xbar);
    commit(problem, state, x_new, y_new, None)
}

/// ANPDA sweep. The primal prox uses `tau_{k-1}`; then
/// `theta_k = 1 / sqrt(1 + gamma sigma_{k-1})`, `sigma_k = sigma_{k-1} theta_k`,
/// `tau_k = tau_{k-1} / theta_k`, and the dual prox uses `sigma_k`.
pub fn step_anpda(
    problem: &SaddleProblem,
    cfg: &SolverConfig,
    state: &mut SolverState,
) -> Result<()> {
    let (x_md, y_md) = midpoints(cfg, state);
    let x_new = primal_prox(problem, state.tau, &x_md, &state.kty);

    let theta = 1.0 / (1.0 + cfg.gamma * state.sigma).sqrt();
    let sigma = state.sigma * theta;
    // Same as tau_{k-1} / theta_k, written against the invariant
    // sigma_k tau_k = sigma_0 tau_0 so rounding does not accumulate.
    let tau = cfg.sigma * cfg.tau / sigma;

    let xbar = extrapolate(&x_new, &state.x, theta);
    let k_xbar = problem.k.apply(&xbar)?;
    let y_new = dual_prox(problem, sigma, &y_md, &k_xbar);
    commit(problem, state, x_new, y_new, None)?;
    state.theta = theta;
    state.sigma = sigma;
    state.tau = tau;
    Ok(())
}

/// NPDAL sweep with backtracking on `tau_k`.
///
/// Starting from `tau_k = tau_{k-1} sqrt(1 + theta_{k-1})`, each trial sets
/// `theta_k = tau_k / tau_{k-1}`, extrapolates, takes the dual prox with
/// step `beta tau_k` and accepts once
/// `sqrt(beta) tau_k ||K^T y+ - K^T y|| <= delta ||y+ - y||`; otherwise
/// `tau_k <- mu tau_k`.
pub fn step_npdal(
    problem: &SaddleProblem,
    cfg: &SolverConfig,
    state: &mut SolverState,
) -> Result<()> {
    let iteration = state.k + 1;
    let (x_md, y_md) = midpoints(cfg, state);
    let tau_prev = state.tau;
    let x_new = primal_prox(problem, tau_prev, &x_md, &state.kty);
    let kx_new = problem.k.apply(&x_new)?;
    if state.kx.len() != kx_new.len() {
        state.kx = problem.k.apply(&state.x)?;
    }

    let sqrt_beta = cfg.beta.sqrt();
    let mut tau = tau_prev * (1.0 + state.theta).sqrt();
    let mut backtracks = 0;
    let mut kty_new = vec![0.0; state.kty.len()];
    let mut k_xbar = vec![0.0; kx_new.len()];
    loop {
        let theta = tau / tau_prev;
        lincomb(1.0 + theta, &kx_new, -theta, &state.kx, &mut k_xbar);
        let y_new = dual_prox(problem, cfg.beta * tau, &y_md, &k_xbar);
        problem.k.apply_transpose_into(&y_new, &mut kty_new);

        let lhs = sqrt_beta * tau * dist(&kty_new, &state.kty);
        let rhs = cfg.delta * dist(&y_new, &state.y);
        if lhs <= rhs {
            check_finite(iteration, &x_new, &y_new)?;
            state.kx = kx_new;
            commit(problem, state, x_new, y_new, Some(kty_new))?;
            state.theta = theta;
            state.tau = tau;
            state.backtracks_last = backtracks;
            state.total_backtracks += backtracks;
            return Ok(());
        }
        if !lhs.is_finite() || !rhs.is_finite() || norm(&y_new).is_nan() {
            return Err(Error::NonFinite { iteration });
        }
        backtracks += 1;
        if backtracks > cfg.max_backtracks {
            return Err(Error::LinesearchExhausted {
                iteration,
                cap: cfg.max_backtracks,
            });
        }
        tau *= cfg.mu;
    }
}
