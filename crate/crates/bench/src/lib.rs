//! Benchmark harness for the `saddle-core` solvers: JSON configs, reference
//! objective values, parallel runs and CSV / JSON convergence reports.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod reference;
pub mod report;
pub mod runner;

pub use config::{BenchConfig, Budget, OutputFormat, Overrides, ReferenceMode, RunSpec};
pub use error::BenchError;
pub use report::{emit_report, BenchReport};
pub use runner::run_bench;
