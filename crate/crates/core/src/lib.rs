//! Primal-dual first-order methods for saddle-point problems of the form
//!
//! ```text
//! min_x max_y  g(x) + <Kx, y> - f*(y)
//! ```
//!
//! The crate provides the linear-operator layer ([`linops`]), the proximal
//! operators used by the bundled problem classes ([`prox`]), generators and
//! metrics for random matrix games and LASSO instances ([`problems`]), and
//! the solvers themselves ([`solvers`]): the classical PDA and GRPDA schemes
//! plus NPDA, its accelerated variant ANPDA and the linesearch variant NPDAL.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linops;
pub mod problems;
pub mod prox;
pub mod solvers;
pub mod vector;

pub use error::{Error, Result};
pub use linops::{CsrMatrix, DenseMatrix, LinearMap};
pub use problems::{Family, GeneratorSpec, MetricKind, SaddleProblem};
pub use prox::{AffineCase, Prox};
pub use solvers::{Algorithm, RunTrace, Sequence, SolverConfig, SolverState, Termination};
