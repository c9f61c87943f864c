//! Command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};

use saddle_core::{Algorithm, Family, GeneratorSpec};

use crate::config::{BenchConfig, OutputFormat, ReferenceMode, RunSpec};
use crate::error::BenchError;
use crate::report::emit_report;
use crate::runner::run_bench;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProblemClass {
    Matgame,
    Lasso,
}

/// Run primal-dual saddle-point solvers on generated test problems and
/// write convergence traces.
#[derive(Debug, Parser)]
#[command(name = "bench", version)]
pub struct Cli {
    /// Problem class; optional when --config supplies the problem.
    #[arg(value_enum)]
    pub class: Option<ProblemClass>,
    /// Example number within the class.
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
    pub example: Option<u8>,
    /// Comma-separated algorithms (pda, grpda, npda, anpda, npdal).
    #[arg(long)]
    pub algos: Option<String>,
    /// Iteration budget per run.
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Use the reduced desk-scale dimensions.
    #[arg(long)]
    pub desk: bool,
    /// Stop a run once its metric drops to this value.
    #[arg(long)]
    pub target: Option<f64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format; inferred from the --out extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// JSON config file; other flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// How the LASSO reference objective is computed.
    #[arg(long, value_enum)]
    pub reference: Option<ReferenceMode>,
    /// Record the metric every N iterations.
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Wall-clock cap per run in seconds.
    #[arg(long)]
    pub time_limit: Option<f64>,
}

/// Parses a comma-separated algorithm list, naming the first bad token.
pub fn parse_algos(list: &str) -> Result<Vec<Algorithm>, BenchError> {
    let algos = list
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<Algorithm>()
                .map_err(|_| BenchError::Config(format!("unknown algorithm '{t}' in --algos")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if algos.is_empty() {
        return Err(BenchError::Config("--algos is empty".into()));
    }
    Ok(algos)
}

fn family(class: ProblemClass, example: u8) -> Result<Family, BenchError> {
    match class {
        ProblemClass::Matgame => Family::matgame(example),
        ProblemClass::Lasso => Family::lasso(example),
    }
    .map_err(BenchError::from)
}

fn default_algos(family: Family) -> Vec<Algorithm> {
    Algorithm::ALL
        .into_iter()
        .filter(|&a| !(family.is_matgame() && a == Algorithm::Anpda))
        .collect()
}

fn format_for(path: Option<&Path>) -> Option<OutputFormat> {
    path.and_then(|p| p.extension())
        .and_then(|e| e.to_str())
        .map(|e| match e.to_ascii_lowercase().as_str() {
            "json" => OutputFormat::Json,
            _ => OutputFormat::Csv,
        })
}

/// Merges the config file (if any) with the command-line flags.
pub fn build_config(cli: &Cli) -> Result<BenchConfig, BenchError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
            BenchConfig::from_json(&text)?
        }
        None => {
            let class = cli.class.ok_or_else(|| {
                BenchError::Config(
                    "a problem class (matgame or lasso) or --config is required".into(),
                )
            })?;
            let family = family(class, cli.example.unwrap_or(1))?;
            BenchConfig::new(GeneratorSpec::new(family, 1), &default_algos(family))
        }
    };

    if let Some(class) = cli.class {
        let example = cli.example.unwrap_or(1);
        cfg.problem.family = family(class, example)?;
    } else if let Some(example) = cli.example {
        let class = if cfg.problem.family.is_matgame() {
            ProblemClass::Matgame
        } else {
            ProblemClass::Lasso
        };
        cfg.problem.family = family(class, example)?;
    }
    if let Some(list) = &cli.algos {
        cfg.runs = parse_algos(list)?.into_iter().map(RunSpec::new).collect();
    }
    if let Some(seed) = cli.seed {
        cfg.problem.seed = seed;
    }
    if cli.desk {
        cfg.problem.desk = true;
    }
    if let Some(iters) = cli.iters {
        cfg.budget.max_iter = iters;
    }
    if cli.time_limit.is_some() {
        cfg.budget.time_limit = cli.time_limit;
    }
    if cli.target.is_some() {
        cfg.target = cli.target;
    }
    if let Some(n) = cli.record_every {
        cfg.record_every = n;
    }
    if cli.reference.is_some() {
        cfg.reference = cli.reference;
    }
    if let Some(out) = &cli.out {
        cfg.output.path = Some(out.clone());
    }
    if let Some(format) = cli.format.or_else(|| format_for(cli.out.as_deref())) {
        cfg.output.format = format;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<Option<BenchError>, BenchError> {
    let cfg = build_config(cli)?;
    let outcome = run_bench(&cfg)?;
    emit_report(
        &outcome.report,
        cfg.output.format,
        cfg.output.path.as_deref(),
    )?;
    for run in &outcome.report.runs {
        let s = &run.summary;
        eprintln!(
            "{}: {} iterations, final metric {:.6e}, {:?}",
            run.label,
            s.iterations,
            s.final_metric.unwrap_or(f64::NAN),
            s.terminated_by
        );
    }
    Ok(outcome.failure)
}

/// Runs the CLI on `args` and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(None) => 0,
        Ok(Some(failure)) | Err(failure) => {
            eprintln!("error: {failure}");
            failure.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("bench").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn unknown_algorithm_is_named() {
        let err = parse_algos("pda,fista,npda").unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("'fista'"));
    }

    #[test]
    fn flags_build_a_config() {
        let cfg = build_config(&cli(&[
            "matgame",
            "--example",
            "3",
            "--algos",
            "pda,npda",
            "--iters",
            "50",
            "--seed",
            "7",
            "--out",
            "x.json",
        ]))
        .unwrap();
        assert_eq!(cfg.problem.family, Family::Matgame3);
        assert_eq!(cfg.problem.seed, 7);
        assert_eq!(cfg.budget.max_iter, 50);
        assert_eq!(cfg.runs.len(), 2);
        assert_eq!(cfg.output.format, OutputFormat::Json);
    }

    #[test]
    fn default_algorithms_skip_anpda_on_games() {
        let cfg = build_config(&cli(&["matgame"])).unwrap();
        assert!(cfg.runs.iter().all(|r| r.algo != Algorithm::Anpda));
        let cfg = build_config(&cli(&["lasso", "--desk"])).unwrap();
        assert_eq!(cfg.runs.len(), 5);
        assert!(cfg.problem.desk);
    }

    #[test]
    fn example_out_of_range_is_rejected_by_parser() {
        let err = Cli::try_parse_from(["bench", "lasso", "--example", "5"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_class_without_config() {
        assert_eq!(
            build_config(&cli(&["--iters", "3"]))
                .unwrap_err()
                .exit_code(),
            2
        );
    }
}
