//! Iterative primal-dual solvers and the shared run loop.
//!
//! # Index mapping
//!
//! The textbook statements stagger the primal and dual indices: iteration `k`
//! produces `x_k` from the dual point `y_k` and then `y_{k+1}`, starting from
//! `(x_0, y_1)`. Here a single counter `k = 1, 2, ...` is used and one call to
//! [`step`] performs the whole sweep:
//!
//! | state field before step | textbook symbol |
//! |-------------------------|------------------|
//! | `x`, `x_ag`             | `x_{k-1}`, `x_{k-1}^ag` |
//! | `y`, `y_ag`             | `y_k`, `y_k^ag`  |
//! | `a.at(k)`, `b.at(k)`    | `a_k`, `b_{k+1}` |
//!
//! After the step `x` holds `x_k`, `y` holds `y_{k+1}` and `y_prev` holds the
//! dual point `y_k` that was paired with `x_k` in the primal update. The
//! initial dual point supplied by the caller plays the role of `y_1`.

mod steps;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::problems::{MetricKind, SaddleProblem};
use crate::vector::check_len;
use crate::{Error, Result};

pub use steps::{step, step_anpda, step_grpda, step_npda, step_npdal, step_pda};

/// `(sqrt(5) + 1) / 2`, the upper bound used for the linesearch ratio.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

/// Relative slack for stepsize conditions that the default settings meet
/// with equality.
const BOUNDARY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pda,
    Grpda,
    Npda,
    Anpda,
    Npdal,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Pda,
        Algorithm::Grpda,
        Algorithm::Npda,
        Algorithm::Anpda,
        Algorithm::Npdal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Pda => "pda",
            Algorithm::Grpda => "grpda",
            Algorithm::Npda => "npda",
            Algorithm::Anpda => "anpda",
            Algorithm::Npdal => "npdal",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == lower)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm '{s}'")))
    }
}

/// Weights `a_k` or `b_k`, indexed from `k = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sequence {
    Constant(f64),
    /// Entry `i` is the weight at `k = i + 1`; the last entry repeats.
    Explicit(Vec<f64>),
}

impl Sequence {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            Sequence::Constant(v) => *v,
            Sequence::Explicit(values) => {
                let idx = k.saturating_sub(1).min(values.len().saturating_sub(1));
                values.get(idx).copied().unwrap_or(0.0)
            }
        }
    }

    pub fn sup(&self) -> f64 {
        match self {
            Sequence::Constant(v) => *v,
            Sequence::Explicit(values) => values.iter().copied().fold(0.0, f64::max),
        }
    }

    fn validate(&self, name: &str) -> Result<()> {
        let ok = |v: f64| (0.0..1.0).contains(&v);
        let valid = match self {
            Sequence::Constant(v) => ok(*v),
            Sequence::Explicit(values) => !values.is_empty() && values.iter().all(|&v| ok(v)),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "{name} weights must lie in [0, 1) (got {self:?})"
            )))
        }
    }
}

impl Default for Sequence {
    fn default() -> Self {
        Sequence::Constant(0.0)
    }
}

/// Parameters for one solver run.
///
/// `tau` and `sigma` are the constant stepsizes of PDA, GRPDA and NPDA and
/// the initial stepsizes of ANPDA. NPDAL starts from `tau0` and uses
/// `beta`, `delta`, `mu` for its linesearch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algo: Algorithm,
    pub tau: f64,
    pub sigma: f64,
    /// Extrapolation weight for PDA and NPDA.
    pub theta: f64,
    /// GRPDA averaging parameter.
    pub psi: f64,
    pub a: Sequence,
    pub b: Sequence,
    /// ANPDA strong-convexity parameter used in the stepsize schedule.
    pub gamma: f64,
    pub beta: f64,
    pub delta: f64,
    pub mu: f64,
    pub tau0: f64,
    pub max_iter: usize,
    pub target_metric: Option<f64>,
    pub record_every: usize,
    pub max_backtracks: usize,
    /// Wall-clock budget on algorithm time, in seconds.
    pub time_limit: Option<f64>,
}

impl SolverConfig {
    /// A config with neutral defaults; stepsizes still have to be set.
    pub fn new(algo: Algorithm) -> Self {
        Self {
            algo,
            tau: 0.0,
            sigma: 0.0,
            theta: 1.0,
            psi: 1.618,
            a: Sequence::Constant(0.0),
            b: Sequence::Constant(0.0),
            gamma: 0.1,
            beta: 1.0,
            delta: 0.96,
            mu: 0.7,
            tau0: 0.0,
            max_iter: 1000,
            target_metric: None,
            record_every: 1,
            max_backtracks: 100,
            time_limit: None,
        }
    }

    /// Checks everything that does not depend on `||K||`.
    pub fn check_structure(&self, problem: &SaddleProblem) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )))
            }
        };
        if self.record_every == 0 {
            return Err(Error::InvalidConfig(
                "record_every must be at least 1".into(),
            ));
        }
        if let Some(t) = self.time_limit {
            positive("time_limit", t)?;
        }
        self.a.validate("a")?;
        self.b.validate("b")?;
        match self.algo {
            Algorithm::Pda => {
                positive("tau", self.tau)?;
                positive("sigma", self.sigma)?;
                if !(0.0..=1.0).contains(&self.theta) {
                    return Err(Error::InvalidConfig(format!(
                        "PDA theta must lie in [0, 1], got {}",
                        self.theta
                    )));
                }
            }
            Algorithm::Grpda => {
                positive("tau", self.tau)?;
                positive("sigma", self.sigma)?;
                if !(self.psi > 1.0 && self.psi <= GOLDEN_RATIO) {
                    return Err(Error::InvalidConfig(format!(
                        "psi must lie in (1, {GOLDEN_RATIO}], got {}",
                        self.psi
                    )));
                }
            }
            Algorithm::Npda => {
                positive("tau", self.tau)?;
                positive("sigma", self.sigma)?;
                if self.theta != 1.0 {
                    return Err(Error::InvalidConfig(format!(
                        "NPDA requires theta = 1, got {}",
                        self.theta
                    )));
                }
            }
            Algorithm::Anpda => {
                positive("tau", self.tau)?;
                positive("sigma", self.sigma)?;
                positive("gamma", self.gamma)?;
                let modulus = problem.gamma_fstar();
                if self.gamma > modulus * (1.0 + BOUNDARY_EPS) {
                    return Err(Error::InvalidConfig(format!(
                        "gamma {} exceeds the strong-convexity modulus {modulus} of f*",
                        self.gamma
                    )));
                }
            }
            Algorithm::Npdal => {
                positive("tau0", self.tau0)?;
                positive("beta", self.beta)?;
                for (name, v) in [("delta", self.delta), ("mu", self.mu)] {
                    if !(v > 0.0 && v < 1.0) {
                        return Err(Error::InvalidConfig(format!(
                            "{name} must lie in (0, 1), got {v}"
                        )));
                    }
                }
                let (a, b) = (self.a.sup(), self.b.sup());
                if self.delta + GOLDEN_RATIO * GOLDEN_RATIO * a + a >= 1.0 {
                    return Err(Error::InvalidConfig(format!(
                        "delta + theta^2 a + a = {} must be below 1",
                        self.delta + GOLDEN_RATIO * GOLDEN_RATIO * a + a
                    )));
                }
                if self.delta + b >= 1.0 {
                    return Err(Error::InvalidConfig(format!(
                        "delta + b = {} must be below 1",
                        self.delta + b
                    )));
                }
                if self.max_backtracks == 0 {
                    return Err(Error::InvalidConfig(
                        "max_backtracks must be at least 1".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Full validation, including the stepsize conditions in terms of the
    /// operator norm `l`.
    pub fn validate(&self, problem: &SaddleProblem, l: f64) -> Result<()> {
        self.check_structure(problem)?;
        if self.algo == Algorithm::Npdal {
            return Ok(());
        }
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "operator norm must be finite, got {l}"
            )));
        }
        let product = (self.sigma * self.tau).sqrt() * l;
        match self.algo {
            Algorithm::Pda => {
                if self.theta == 1.0 && product > 1.0 + BOUNDARY_EPS {
                    return Err(Error::InvalidConfig(format!(
                        "PDA needs sqrt(sigma tau) L <= 1, got {product}"
                    )));
                }
            }
            Algorithm::Grpda => {
                let prod2 = self.sigma * self.tau * l * l;
                if prod2 > self.psi * (1.0 + BOUNDARY_EPS) {
                    return Err(Error::InvalidConfig(format!(
                        "GRPDA needs tau sigma L^2 <= psi = {}, got {prod2}",
                        self.psi
                    )));
                }
            }
            Algorithm::Npda | Algorithm::Anpda => {
                let bound = 1.0 - self.a.sup().max(self.b.sup());
                if product >= bound {
                    return Err(Error::InvalidConfig(format!(
                        "need sqrt(sigma tau) L < 1 - max(a, b) = {bound}, got {product}"
                    )));
                }
            }
            Algorithm::Npdal => unreachable!(),
        }
        Ok(())
    }
}

/// Settings used in the reference experiments, chosen by problem class.
///
/// `l` is the spectral norm of `K`.
pub fn default_config(algo: Algorithm, problem: &SaddleProblem, l: f64) -> Result<SolverConfig> {
    if !(l > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "operator norm must be positive, got {l}"
        )));
    }
    let mut cfg = SolverConfig::new(algo);
    let tau0 = (problem.rows().min(problem.cols()) as f64).sqrt() / problem.k.frobenius_norm();
    let psi: f64 = 1.618;
    match (problem.metric, algo) {
        (MetricKind::GameGap, Algorithm::Pda) => {
            cfg.tau = 1.0 / l;
            cfg.sigma = 1.0 / l;
        }
        (MetricKind::GameGap, Algorithm::Grpda) => {
            cfg.psi = psi;
            cfg.tau = psi.sqrt() / l;
            cfg.sigma = psi.sqrt() / l;
        }
        (MetricKind::GameGap, Algorithm::Npda) => {
            cfg.sigma = 1.0 / l;
            cfg.tau = 2.0 / 3.0 * cfg.sigma;
            cfg.a = Sequence::Constant(0.01);
            cfg.b = Sequence::Constant(0.01);
        }
        (MetricKind::GameGap, Algorithm::Anpda) => {
            return Err(Error::InvalidArgument(
                "ANPDA needs a strongly convex f*; matrix games have none".into(),
            ));
        }
        (MetricKind::GameGap, Algorithm::Npdal) => {
            cfg.beta = 1.0;
            cfg.delta = 0.96;
            cfg.mu = 0.7;
            cfg.tau0 = tau0;
            cfg.a = Sequence::Constant(0.01);
            cfg.b = Sequence::Constant(0.01);
        }
        (MetricKind::ObjectiveError, Algorithm::Pda) => {
            cfg.sigma = 1.0 / (20.0 * l);
            cfg.tau = 20.0 / l;
        }
        (MetricKind::ObjectiveError, Algorithm::Grpda) => {
            cfg.psi = psi;
            cfg.sigma = psi.sqrt() / (20.0 * l);
            cfg.tau = 20.0 * psi.sqrt() / l;
        }
        (MetricKind::ObjectiveError, Algorithm::Npda) => {
            cfg.sigma = 3.0 / (10.0 * l);
            cfg.tau = 3.0 / l;
            cfg.a = Sequence::Constant(0.01);
            cfg.b = Sequence::Constant(0.01);
        }
        (MetricKind::ObjectiveError, Algorithm::Anpda) => {
            cfg.sigma = 3.0 / (10.0 * l);
            cfg.tau = 33.0 / (10.0 * l);
            cfg.a = Sequence::Constant(0.005);
            cfg.b = Sequence::Constant(0.005);
            cfg.gamma = 0.1;
        }
        (MetricKind::ObjectiveError, Algorithm::Npdal) => {
            cfg.beta = 0.1;
            cfg.delta = 0.96;
            cfg.mu = 0.7;
            cfg.tau0 = tau0;
            cfg.a = Sequence::Constant(0.01);
            cfg.b = Sequence::Constant(0.0);
        }
    }
    Ok(cfg)
}

/// Iterates and adaptive scalars carried between steps.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    /// Number of completed iterations.
    pub k: usize,
    pub x: Vec<f64>,
    pub x_prev: Vec<f64>,
    pub x_ag: Vec<f64>,
    pub y: Vec<f64>,
    /// Dual point used by the most recent primal update.
    pub y_prev: Vec<f64>,
    pub y_ag: Vec<f64>,
    /// GRPDA averaged point.
    pub z: Vec<f64>,
    pub tau: f64,
    pub sigma: f64,
    pub theta: f64,
    pub backtracks_last: usize,
    pub total_backtracks: usize,
    /// `K^T y` for the current `y`.
    pub(crate) kty: Vec<f64>,
    /// `K x` for the current `x` (maintained by NPDAL only).
    pub(crate) kx: Vec<f64>,
}

impl SolverState {
    pub fn new(
        problem: &SaddleProblem,
        cfg: &SolverConfig,
        x0: &[f64],
        y0: &[f64],
    ) -> Result<Self> {
        check_len(x0, problem.cols())?;
        check_len(y0, problem.rows())?;
        let kty = problem.k.apply_transpose(y0)?;
        let kx = if cfg.algo == Algorithm::Npdal {
            problem.k.apply(x0)?
        } else {
            Vec::new()
        };
        let tau = if cfg.algo == Algorithm::Npdal {
            cfg.tau0
        } else {
            cfg.tau
        };
        Ok(Self {
            k: 0,
            x: x0.to_vec(),
            x_prev: x0.to_vec(),
            x_ag: x0.to_vec(),
            y: y0.to_vec(),
            y_prev: y0.to_vec(),
            y_ag: y0.to_vec(),
            z: x0.to_vec(),
            tau,
            sigma: cfg.sigma,
            theta: 1.0,
            backtracks_last: 0,
            total_backtracks: 0,
            kty,
            kx,
        })
    }

    /// `K^T y` at the current dual iterate.
    pub fn kty(&self) -> &[f64] {
        &self.kty
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub iter: usize,
    pub elapsed_sec: f64,
    pub metric: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIter,
    TargetReached,
    TimeLimit,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub records: Vec<Record>,
    pub final_x: Vec<f64>,
    pub final_y: Vec<f64>,
    pub iterations: usize,
    pub total_backtracks: usize,
    pub terminated_by: Termination,
    pub error: Option<String>,
}

impl RunTrace {
    pub fn final_metric(&self) -> Option<f64> {
        self.records.last().map(|r| r.metric)
    }
}

/// Monotone time source used by [`run_with_clock`].
pub trait Clock {
    fn now(&mut self) -> Duration;
}

/// [`Clock`] backed by [`Instant`].
#[derive(Debug, Clone, Copy)]
pub struct MonotonicClock {
    start: Instant,
}

impl Default for MonotonicClock {
    fn default() -> Self {
        Self {
            start: Instant::now(),
        }
    }
}

impl Clock for MonotonicClock {
    fn now(&mut self) -> Duration {
        self.start.elapsed()
    }
}

/// [`run_with_clock`] on the system monotonic clock.
pub fn run(
    problem: &SaddleProblem,
    cfg: &SolverConfig,
    x0: &[f64],
    y0: &[f64],
) -> Result<RunTrace> {
    run_with_clock(problem, cfg, x0, y0, &mut MonotonicClock::default())
}

/// Runs `cfg.algo` from `(x0, y0)`.
///
/// The metric is recorded at iteration 0, every `record_every` iterations
/// and at the last iteration. Recorded time covers the steps only; metric
/// evaluation is excluded. A step failure ends the run early with
/// [`Termination::Error`] and the partial trace; only invalid configurations
/// and dimension errors are returned as `Err`.
pub fn run_with_clock<C: Clock>(
    problem: &SaddleProblem,
    cfg: &SolverConfig,
    x0: &[f64],
    y0: &[f64],
    clock: &mut C,
) -> Result<RunTrace> {
    cfg.check_structure(problem)?;
    let mut state = SolverState::new(problem, cfg, x0, y0)?;
    let mut records = Vec::new();
    let mut algo_time = Duration::ZERO;
    let target = cfg.target_metric;

    let record =
        |state: &SolverState, algo_time: Duration, records: &mut Vec<Record>| -> Result<f64> {
            let metric = problem.metric_value(&state.x, &state.y)?;
            if !metric.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "non-finite metric {metric} at iteration {}",
                    state.k
                )));
            }
            records.push(Record {
                iter: state.k,
                elapsed_sec: algo_time.as_secs_f64(),
                metric,
            });
            Ok(metric)
        };

    let finish = |state: SolverState,
                  records: Vec<Record>,
                  by: Termination,
                  error: Option<String>| RunTrace {
        records,
        iterations: state.k,
        total_backtracks: state.total_backtracks,
        final_x: state.x,
        final_y: state.y,
        terminated_by: by,
        error,
    };

    let metric = match record(&state, algo_time, &mut records) {
        Ok(m) => m,
        Err(e) => {
            return Ok(finish(
                state,
                records,
                Termination::Error,
                Some(e.to_string()),
            ))
        }
    };
    if target.is_some_and(|t| metric <= t) {
        return Ok(finish(state, records, Termination::TargetReached, None));
    }

    while state.k < cfg.max_iter {
        let t0 = clock.now();
        let result = step(problem, cfg, &mut state);
        algo_time += clock.now().saturating_sub(t0);
        if let Err(e) = result {
            return Ok(finish(
                state,
                records,
                Termination::Error,
                Some(e.to_string()),
            ));
        }
        let last = state.k == cfg.max_iter;
        let out_of_time = cfg.time_limit.is_some_and(|t| algo_time.as_secs_f64() >= t);
        if state.k % cfg.record_every == 0 || last || out_of_time {
            let metric = match record(&state, algo_time, &mut records) {
                Ok(m) => m,
                Err(e) => {
                    return Ok(finish(
                        state,
                        records,
                        Termination::Error,
                        Some(e.to_string()),
                    ))
                }
            };
            if target.is_some_and(|t| metric <= t) {
                return Ok(finish(state, records, Termination::TargetReached, None));
            }
        }
        if out_of_time && !last {
            return Ok(finish(state, records, Termination::TimeLimit, None));
        }
    }
    Ok(finish(state, records, Termination::MaxIter, None))
}
