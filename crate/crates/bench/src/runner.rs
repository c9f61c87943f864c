//! Builds the problem, runs the configured solvers and assembles a report.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use saddle_core::problems::generate;
use saddle_core::solvers::{default_config, run};
use saddle_core::{RunTrace, SaddleProblem, SolverConfig, Termination};

use crate::config::BenchConfig;
use crate::error::BenchError;
use crate::reference::compute_reference;
use crate::report::{build_note, BenchReport, ProblemFingerprint, RunReport};

/// Relative tolerance of the operator-norm estimate.
pub const NORM_TOL: f64 = 1e-10;
pub const NORM_MAX_ITER: usize = 100_000;

/// Environment variable capping the number of concurrent runs.
pub const THREADS_VAR: &str = "BENCH_THREADS";

/// A generated instance with its norm estimate and reference value.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub problem: SaddleProblem,
    pub operator_norm: f64,
    pub fingerprint: ProblemFingerprint,
}

pub fn prepare(cfg: &BenchConfig) -> Result<Prepared, BenchError> {
    cfg.validate()?;
    let mut problem = generate(&cfg.problem)?;
    let l = problem.k.operator_norm(NORM_TOL, NORM_MAX_ITER)?;
    let phi_star = compute_reference(&problem, cfg.reference_mode(), l, cfg.budget.max_iter)?;
    problem.reference_value = phi_star;
    let (rows, cols) = (problem.rows(), problem.cols());
    let fingerprint = ProblemFingerprint {
        family: cfg.problem.family,
        seed: cfg.problem.seed,
        desk: cfg.problem.desk,
        rows,
        cols,
        nnz: problem.k.stored_entries(),
        operator_norm: l,
        phi_star,
    };
    Ok(Prepared {
        problem,
        operator_norm: l,
        fingerprint,
    })
}

/// Solver settings for every run, validated against the instance.
pub fn solver_configs(
    cfg: &BenchConfig,
    prepared: &Prepared,
) -> Result<Vec<SolverConfig>, BenchError> {
    cfg.runs
        .iter()
        .map(|spec| {
            let context =
                |e: saddle_core::Error| BenchError::Config(format!("run '{}': {e}", spec.label));
            let mut sc = default_config(spec.algo, &prepared.problem, prepared.operator_norm)
                .map_err(context)?;
            spec.overrides.apply(&mut sc);
            sc.max_iter = cfg.budget.max_iter;
            sc.time_limit = cfg.budget.time_limit;
            sc.target_metric = cfg.target;
            sc.record_every = cfg.record_every;
            sc.validate(&prepared.problem, prepared.operator_norm)
                .map_err(context)?;
            Ok(sc)
        })
        .collect()
}

/// Worker count from `BENCH_THREADS`, falling back to the available cores.
pub fn thread_count() -> usize {
    std::env::var(THREADS_VAR)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs every config on `problem` with at most `threads` concurrent runs.
/// Results come back in input order.
pub fn run_all(
    problem: &SaddleProblem,
    configs: &[SolverConfig],
    threads: usize,
) -> Vec<saddle_core::Result<RunTrace>> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<saddle_core::Result<RunTrace>>>> =
        Mutex::new((0..configs.len()).map(|_| None).collect());
    let workers = threads.clamp(1, configs.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(cfg) = configs.get(i) else { break };
                let trace = run(problem, cfg, &problem.x0, &problem.y0);
                slots.lock().unwrap()[i] = Some(trace);
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every run finishes"))
        .collect()
}

/// A finished benchmark: the report plus the first solver failure, if any.
#[derive(Debug)]
pub struct BenchOutcome {
    pub report: BenchReport,
    pub failure: Option<BenchError>,
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchOutcome, BenchError> {
    let prepared = prepare(cfg)?;
    let configs = solver_configs(cfg, &prepared)?;
    let traces = run_all(&prepared.problem, &configs, thread_count());

    let mut runs = Vec::with_capacity(traces.len());
    let mut failure = None;
    for (spec, trace) in cfg.runs.iter().zip(traces) {
        let trace = trace.map_err(|e| BenchError::Config(format!("run '{}': {e}", spec.label)))?;
        if trace.terminated_by == Termination::Error && failure.is_none() {
            failure = Some(BenchError::Solver {
                label: spec.label.clone(),
                message: trace.error.clone().unwrap_or_default(),
            });
        }
        runs.push(RunReport::from_trace(&spec.label, spec.algo, &trace));
    }
    Ok(BenchOutcome {
        report: BenchReport {
            problem: prepared.fingerprint,
            build: build_note(),
            runs,
        },
        failure,
    })
}
