use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver error in run '{label}': {message}")]
    Solver { label: String, message: String },
    #[error("reference computation failed: {0}")]
    Reference(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl BenchError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Solver { .. } | BenchError::Reference(_) => 3,
            BenchError::Io { .. } => 1,
        }
    }
}

impl From<saddle_core::Error> for BenchError {
    fn from(e: saddle_core::Error) -> Self {
        BenchError::Config(e.to_string())
    }
}
