//! Benchmark reports and their CSV / JSON encodings.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use saddle_core::{Algorithm, Family, RunTrace, Termination};

use crate::config::OutputFormat;
use crate::error::BenchError;

pub const CSV_HEADER: &str = "run,iter,time_sec,metric";

/// Identifies the instance every run in a report was solved on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFingerprint {
    pub family: Family,
    pub seed: u64,
    pub desk: bool,
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
    /// Estimated spectral norm of `K`.
    pub operator_norm: f64,
    pub phi_star: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub iterations: usize,
    pub final_metric: Option<f64>,
    pub min_metric: Option<f64>,
    pub elapsed_sec: f64,
    pub total_backtracks: usize,
    pub terminated_by: Termination,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub label: String,
    pub algo: Algorithm,
    /// `[iter, time_sec, metric]` triples.
    pub records: Vec<(usize, f64, f64)>,
    pub summary: RunSummary,
}

impl RunReport {
    pub fn from_trace(label: &str, algo: Algorithm, trace: &RunTrace) -> Self {
        let records: Vec<_> = trace
            .records
            .iter()
            .map(|r| (r.iter, r.elapsed_sec, r.metric))
            .collect();
        let min_metric = records.iter().map(|r| r.2).reduce(f64::min);
        Self {
            label: label.to_string(),
            algo,
            summary: RunSummary {
                iterations: trace.iterations,
                final_metric: trace.final_metric(),
                min_metric,
                elapsed_sec: records.last().map_or(0.0, |r| r.1),
                total_backtracks: trace.total_backtracks,
                terminated_by: trace.terminated_by,
                error: trace.error.clone(),
            },
            records,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub problem: ProblemFingerprint,
    /// Crate version and build profile.
    pub build: String,
    pub runs: Vec<RunReport>,
}

pub fn build_note() -> String {
    let profile = if cfg!(debug_assertions) {
        "debug"
    } else {
        "release"
    };
    format!("saddle-bench {} ({profile})", env!("CARGO_PKG_VERSION"))
}

impl BenchReport {
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for run in &self.runs {
            for &(iter, time, metric) in &run.records {
                writeln!(out, "{},{iter},{time:.16e},{metric:.16e}", run.label)?;
            }
        }
        out.flush()
    }

    pub fn write_json<W: Write>(&self, out: W) -> io::Result<()> {
        let mut out = out;
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)?;
        out.flush()
    }

    pub fn write<W: Write>(&self, format: OutputFormat, out: W) -> io::Result<()> {
        match format {
            OutputFormat::Csv => self.write_csv(out),
            OutputFormat::Json => self.write_json(out),
        }
    }
}

/// Writes `report` to `path`, or to standard output when `path` is `None`.
pub fn emit_report(
    report: &BenchReport,
    format: OutputFormat,
    path: Option<&Path>,
) -> Result<(), BenchError> {
    match path {
        Some(path) => {
            let io_err = |source| BenchError::Io {
                path: path.to_path_buf(),
                source,
            };
            let file = File::create(path).map_err(io_err)?;
            report.write(format, BufWriter::new(file)).map_err(io_err)
        }
        None => report
            .write(format, io::stdout().lock())
            .map_err(|source| BenchError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}
