//! JSON benchmark configuration.

use std::collections::HashSet;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use saddle_core::{Algorithm, GeneratorSpec, Sequence, SolverConfig};

use crate::error::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// How the optimal LASSO objective is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    None,
    #[value(alias = "long_run")]
    LongRun,
    #[value(alias = "oracle_ista")]
    OracleIsta,
    /// Minimum of `long_run` and `oracle_ista`.
    Both,
}

/// Per-run parameter overrides applied on top of the default settings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Overrides {
    pub tau: Option<f64>,
    pub sigma: Option<f64>,
    pub theta: Option<f64>,
    pub psi: Option<f64>,
    pub a: Option<Sequence>,
    pub b: Option<Sequence>,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub mu: Option<f64>,
    pub tau0: Option<f64>,
    pub max_backtracks: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut SolverConfig) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*
            };
        }
        set!(
            tau,
            sigma,
            theta,
            psi,
            a,
            b,
            gamma,
            beta,
            delta,
            mu,
            tau0,
            max_backtracks
        );
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub label: String,
    pub algo: Algorithm,
    #[serde(default)]
    pub overrides: Overrides,
}

impl RunSpec {
    pub fn new(algo: Algorithm) -> Self {
        Self {
            label: algo.name().to_string(),
            algo,
            overrides: Overrides::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budget {
    pub max_iter: usize,
    /// Wall-clock cap per run in seconds.
    #[serde(default)]
    pub time_limit: Option<f64>,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_iter: 1000,
            time_limit: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    /// `None` writes to standard output.
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub problem: GeneratorSpec,
    pub runs: Vec<RunSpec>,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default)]
    pub output: Output,
    /// Defaults to `oracle_ista` for LASSO problems and `none` otherwise.
    #[serde(default)]
    pub reference: Option<ReferenceMode>,
    #[serde(default)]
    pub target: Option<f64>,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_record_every() -> usize {
    1
}

impl BenchConfig {
    pub fn new(problem: GeneratorSpec, algos: &[Algorithm]) -> Self {
        Self {
            problem,
            runs: algos.iter().map(|&a| RunSpec::new(a)).collect(),
            budget: Budget::default(),
            output: Output::default(),
            reference: None,
            target: None,
            record_every: 1,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, BenchError> {
        serde_json::from_str(text).map_err(|e| BenchError::Config(format!("invalid config: {e}")))
    }

    pub fn reference_mode(&self) -> ReferenceMode {
        match self.reference {
            Some(mode) => mode,
            None if self.problem.family.is_matgame() => ReferenceMode::None,
            None => ReferenceMode::OracleIsta,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let mut seen = HashSet::new();
        for run in &self.runs {
            if !seen.insert(run.label.as_str()) {
                return Err(BenchError::Config(format!(
                    "duplicate run label '{}'",
                    run.label
                )));
            }
        }
        if self.budget.max_iter == 0 {
            return Err(BenchError::Config(
                "budget max_iter must be positive".into(),
            ));
        }
        if let Some(t) = self.budget.time_limit {
            if !(t > 0.0 && t.is_finite()) {
                return Err(BenchError::Config(format!(
                    "time limit must be positive, got {t}"
                )));
            }
        }
        if self.record_every == 0 {
            return Err(BenchError::Config("record_every must be at least 1".into()));
        }
        if self.problem.family.is_matgame() && self.reference_mode() != ReferenceMode::None {
            return Err(BenchError::Config(
                "reference values apply to LASSO problems only".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use saddle_core::Family;

    #[test]
    fn duplicate_labels_rejected() {
        let cfg = BenchConfig::new(
            GeneratorSpec::new(Family::Matgame1, 1),
            &[Algorithm::Pda, Algorithm::Pda],
        );
        assert!(matches!(cfg.validate(), Err(BenchError::Config(m)) if m.contains("pda")));
    }

    #[test]
    fn zero_budget_rejected() {
        let mut cfg = BenchConfig::new(GeneratorSpec::new(Family::Matgame1, 1), &[Algorithm::Pda]);
        cfg.budget.max_iter = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_reference_by_class() {
        let cfg = BenchConfig::new(GeneratorSpec::desk(Family::Lasso1, 1), &[Algorithm::Npda]);
        assert_eq!(cfg.reference_mode(), ReferenceMode::OracleIsta);
        let cfg = BenchConfig::new(GeneratorSpec::new(Family::Matgame2, 1), &[Algorithm::Npda]);
        assert_eq!(cfg.reference_mode(), ReferenceMode::None);
    }

    #[test]
    fn parses_json_with_overrides() {
        let text = r#"{
            "problem": {"family": "lasso1", "seed": 3, "desk": true},
            "runs": [{"label": "fast", "algo": "npda", "overrides": {"tau": 0.5, "a": [0.1, 0.05]}}],
            "budget": {"max_iter": 50},
            "reference": "both"
        }"#;
        let cfg = BenchConfig::from_json(text).unwrap();
        assert_eq!(
            cfg.runs[0].overrides.a,
            Some(Sequence::Explicit(vec![0.1, 0.05]))
        );
        assert_eq!(cfg.reference_mode(), ReferenceMode::Both);
        let mut sc = SolverConfig::new(Algorithm::Npda);
        cfg.runs[0].overrides.apply(&mut sc);
        assert_eq!(sc.tau, 0.5);
        assert!(BenchConfig::from_json(
            r#"{"problem": {"family": "lasso1", "seed": 1}, "runs": [], "bogus": 1}"#
        )
        .is_err());
    }
}
