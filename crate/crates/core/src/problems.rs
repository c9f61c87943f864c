//! Saddle-point problem bundles, the random instance generators and the
//! convergence metrics.
//!
//! Random numbers come from `ChaCha8Rng::seed_from_u64(seed)`. Uniform draws
//! use `rand_distr::Uniform`, normal draws use `rand_distr::StandardNormal`
//! (ziggurat) scaled as needed. Streams are stable within one build of the
//! crate; nothing here promises bit-equality with other implementations.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::linops::{CsrMatrix, DenseMatrix, LinearMap};
use crate::prox::Prox;
use crate::vector::{check_len, dot};
use crate::{Error, Result};

/// Feasibility slack accepted by [`game_gap`].
const SIMPLEX_SUM_TOL: f64 = 1e-8;
const SIMPLEX_NEG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// `max_i (Kx)_i - min_j (K^T y)_j`
    GameGap,
    /// `phi(x) - phi_*` for LASSO instances.
    ObjectiveError,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Matgame1,
    Matgame2,
    Matgame3,
    Matgame4,
    Lasso1,
    Lasso2,
    Lasso3,
    Lasso4,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Matgame1,
        Family::Matgame2,
        Family::Matgame3,
        Family::Matgame4,
        Family::Lasso1,
        Family::Lasso2,
        Family::Lasso3,
        Family::Lasso4,
    ];

    pub fn matgame(example: u8) -> Result<Self> {
        match example {
            1 => Ok(Family::Matgame1),
            2 => Ok(Family::Matgame2),
            3 => Ok(Family::Matgame3),
            4 => Ok(Family::Matgame4),
            _ => Err(Error::InvalidArgument(format!(
                "matrix game example must be 1-4, got {example}"
            ))),
        }
    }

    pub fn lasso(example: u8) -> Result<Self> {
        match example {
            1 => Ok(Family::Lasso1),
            2 => Ok(Family::Lasso2),
            3 => Ok(Family::Lasso3),
            4 => Ok(Family::Lasso4),
            _ => Err(Error::InvalidArgument(format!(
                "lasso example must be 1-4, got {example}"
            ))),
        }
    }

    pub fn is_matgame(self) -> bool {
        matches!(
            self,
            Family::Matgame1 | Family::Matgame2 | Family::Matgame3 | Family::Matgame4
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Matgame1 => "matgame1",
            Family::Matgame2 => "matgame2",
            Family::Matgame3 => "matgame3",
            Family::Matgame4 => "matgame4",
            Family::Lasso1 => "lasso1",
            Family::Lasso2 => "lasso2",
            Family::Lasso3 => "lasso3",
            Family::Lasso4 => "lasso4",
        }
    }

    /// `(rows, cols)` of the full-size instance.
    pub fn full_dims(self) -> (usize, usize) {
        match self {
            Family::Matgame1 | Family::Matgame2 => (100, 100),
            Family::Matgame3 => (500, 100),
            Family::Matgame4 => (1000, 2000),
            Family::Lasso1 => (200, 1000),
            Family::Lasso2 => (1000, 2000),
            Family::Lasso3 | Family::Lasso4 => (1000, 5000),
        }
    }

    /// `(rows, cols)` of the reduced preset used for quick runs.
    pub fn desk_dims(self) -> (usize, usize) {
        match self {
            Family::Matgame4 => (200, 400),
            Family::Lasso1 => (50, 200),
            Family::Lasso2 => (250, 500),
            Family::Lasso3 | Family::Lasso4 => (250, 1250),
            other => other.full_dims(),
        }
    }

    fn full_sparsity(self) -> usize {
        match self {
            Family::Lasso1 => 10,
            Family::Lasso2 => 100,
            Family::Lasso3 | Family::Lasso4 => 50,
            _ => 0,
        }
    }

    fn desk_sparsity(self) -> usize {
        match self {
            Family::Lasso1 => 5,
            Family::Lasso2 => 25,
            Family::Lasso3 | Family::Lasso4 => 12,
            _ => 0,
        }
    }

    fn correlation(self) -> Option<f64> {
        match self {
            Family::Lasso3 => Some(0.5),
            Family::Lasso4 => Some(0.9),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown problem family '{s}'")))
    }
}

/// Everything needed to regenerate one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    pub seed: u64,
    /// Use the reduced preset dimensions.
    #[serde(default)]
    pub desk: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    /// Number of nonzeros in the planted LASSO signal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<usize>,
    /// Column correlation for the correlated LASSO designs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<f64>,
    /// Standard deviation of the LASSO observation noise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_std: Option<f64>,
}

impl GeneratorSpec {
    pub fn new(family: Family, seed: u64) -> Self {
        Self {
            family,
            seed,
            desk: false,
            rows: None,
            cols: None,
            sparsity: None,
            correlation: None,
            noise_std: None,
        }
    }

    pub fn desk(family: Family, seed: u64) -> Self {
        Self {
            desk: true,
            ..Self::new(family, seed)
        }
    }

    pub fn with_dims(mut self, rows: usize, cols: usize) -> Self {
        self.rows = Some(rows);
        self.cols = Some(cols);
        self
    }

    pub fn dims(&self) -> (usize, usize) {
        let (m, n) = if self.desk {
            self.family.desk_dims()
        } else {
            self.family.full_dims()
        };
        (self.rows.unwrap_or(m), self.cols.unwrap_or(n))
    }

    pub fn sparsity(&self) -> usize {
        self.sparsity.unwrap_or(if self.desk {
            self.family.desk_sparsity()
        } else {
            self.family.full_sparsity()
        })
    }

    fn validate(&self) -> Result<()> {
        let (m, n) = self.dims();
        if m == 0 || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "dimensions must be positive, got {m}x{n}"
            )));
        }
        if !self.family.is_matgame() {
            if self.sparsity() > n {
                return Err(Error::InvalidArgument(format!(
                    "sparsity {} exceeds dimension {n}",
                    self.sparsity()
                )));
            }
            if let Some(p) = self.correlation.or(self.family.correlation()) {
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::InvalidArgument(format!(
                        "correlation must lie in (0, 1), got {p}"
                    )));
                }
            }
            if let Some(s) = self.noise_std {
                if !(s >= 0.0) {
                    return Err(Error::InvalidArgument(format!(
                        "noise standard deviation must be nonnegative, got {s}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `min_x max_y g(x) + <Kx, y> - f*(y)` with its default start point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaddleProblem {
    pub k: LinearMap,
    pub prox_g: Prox,
    pub prox_fstar: Prox,
    pub metric: MetricKind,
    /// `phi_*` for objective-error metrics.
    pub reference_value: Option<f64>,
    pub x0: Vec<f64>,
    pub y0: Vec<f64>,
}

impl SaddleProblem {
    pub fn new(
        k: LinearMap,
        prox_g: Prox,
        prox_fstar: Prox,
        metric: MetricKind,
        x0: Vec<f64>,
        y0: Vec<f64>,
    ) -> Result<Self> {
        let (m, n) = (k.rows(), k.cols());
        if let Some(d) = prox_g.dim() {
            check_len(&vec![0.0; d], n)?;
        }
        if let Some(d) = prox_fstar.dim() {
            check_len(&vec![0.0; d], m)?;
        }
        check_len(&x0, n)?;
        check_len(&y0, m)?;
        match metric {
            MetricKind::GameGap => {
                if prox_g != Prox::Simplex || prox_fstar != Prox::Simplex {
                    return Err(Error::InvalidArgument(
                        "game gap requires simplex projections on both sides".into(),
                    ));
                }
            }
            MetricKind::ObjectiveError => {
                if !matches!(prox_g, Prox::L1 { .. })
                    || !matches!(prox_fstar, Prox::LassoDual { .. })
                {
                    return Err(Error::InvalidArgument(
                        "objective error requires an l1 primal term and the LASSO dual term".into(),
                    ));
                }
            }
        }
        Ok(Self {
            k,
            prox_g,
            prox_fstar,
            metric,
            reference_value: None,
            x0,
            y0,
        })
    }

    pub fn rows(&self) -> usize {
        self.k.rows()
    }

    pub fn cols(&self) -> usize {
        self.k.cols()
    }

    /// Strong-convexity modulus of `f*`.
    pub fn gamma_fstar(&self) -> f64 {
        self.prox_fstar.modulus()
    }

    /// `(b, lambda)` for LASSO instances.
    pub fn lasso_data(&self) -> Option<(&[f64], f64)> {
        match (&self.prox_g, &self.prox_fstar) {
            (Prox::L1 { lambda }, Prox::LassoDual { b }) => Some((b.as_slice(), *lambda)),
            _ => None,
        }
    }

    /// `phi(x)` for LASSO instances.
    pub fn objective(&self, x: &[f64]) -> Result<f64> {
        let (b, lambda) = self.lasso_data().ok_or_else(|| {
            Error::InvalidArgument("objective is only defined for LASSO problems".into())
        })?;
        lasso_objective(&self.k, b, lambda, x)
    }

    /// The tracked convergence metric at `(x, y)`.
    ///
    /// For objective-error problems without a reference value this is the
    /// raw objective `phi(x)`.
    pub fn metric_value(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        match self.metric {
            MetricKind::GameGap => game_gap(&self.k, x, y),
            MetricKind::ObjectiveError => {
                Ok(self.objective(x)? - self.reference_value.unwrap_or(0.0))
            }
        }
    }

    /// `P(x) + D(y)` anchored at `(xhat, yhat)` with `g` and `f*` evaluated
    /// through the problem's prox descriptors.
    pub fn primal_dual_gap(&self, xhat: &[f64], yhat: &[f64], x: &[f64], y: &[f64]) -> Result<f64> {
        primal_dual_gap(
            &self.k,
            |u| self.prox_g.value(u),
            |v| self.prox_fstar.value(v),
            xhat,
            yhat,
            x,
            y,
        )
    }
}

fn check_simplex(v: &[f64], name: &str) -> Result<()> {
    let sum: f64 = v.iter().sum();
    if !((sum - 1.0).abs() <= SIMPLEX_SUM_TOL) {
        return Err(Error::Infeasible(format!("{name} sums to {sum}")));
    }
    if let Some(&t) = v.iter().find(|&&t| t < -SIMPLEX_NEG_TOL) {
        return Err(Error::Infeasible(format!("{name} has negative entry {t}")));
    }
    Ok(())
}

/// `max_i (Kx)_i - min_j (K^T y)_j` for simplex-feasible `x`, `y`.
pub fn game_gap(k: &LinearMap, x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x, k.cols())?;
    check_len(y, k.rows())?;
    check_simplex(x, "x")?;
    check_simplex(y, "y")?;
    let kx = k.apply(x)?;
    let kty = k.apply_transpose(y)?;
    let max = kx.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = kty.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(max - min)
}

/// `||Kx - b||^2 / 2 + lambda * ||x||_1`
pub fn lasso_objective(k: &LinearMap, b: &[f64], lambda: f64, x: &[f64]) -> Result<f64> {
    check_len(b, k.rows())?;
    let kx = k.apply(x)?;
    let fit: f64 = kx.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum();
    let l1: f64 = x.iter().map(|t| t.abs()).sum();
    Ok(0.5 * fit + lambda * l1)
}

/// `G(x, y) = P(x) + D(y)` with
/// `P(x) = g(x) - g(xhat) + <K^T yhat, x - xhat>` and
/// `D(y) = f*(y) - f*(yhat) - <K xhat, y - yhat>`.
pub fn primal_dual_gap(
    k: &LinearMap,
    g: impl Fn(&[f64]) -> f64,
    fstar: impl Fn(&[f64]) -> f64,
    xhat: &[f64],
    yhat: &[f64],
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    check_len(x, k.cols())?;
    check_len(xhat, k.cols())?;
    check_len(y, k.rows())?;
    check_len(yhat, k.rows())?;
    let kt_yhat = k.apply_transpose(yhat)?;
    let k_xhat = k.apply(xhat)?;
    let dx: Vec<f64> = x.iter().zip(xhat).map(|(a, b)| a - b).collect();
    let dy: Vec<f64> = y.iter().zip(yhat).map(|(a, b)| a - b).collect();
    let primal = g(x) - g(xhat) + dot(&kt_yhat, &dx);
    let dual = fstar(y) - fstar(yhat) - dot(&k_xhat, &dy);
    Ok(primal + dual)
}

/// Builds any of the eight families.
pub fn generate(spec: &GeneratorSpec) -> Result<SaddleProblem> {
    if spec.family.is_matgame() {
        gen_matrix_game(spec)
    } else {
        gen_lasso(spec)
    }
}

/// Random matrix game `min_{x in simplex} max_{y in simplex} <Kx, y>`.
///
/// 1: uniform[-1, 1] entries; 2 and 3: standard normal entries; 4: sparse
/// with exactly `floor(0.1 * m * n)` uniform[0, 1] entries at positions drawn
/// without replacement. The start point is the pair of uniform vectors.
pub fn gen_matrix_game(spec: &GeneratorSpec) -> Result<SaddleProblem> {
    if !spec.family.is_matgame() {
        return Err(Error::InvalidArgument(format!(
            "{} is not a matrix game family",
            spec.family
        )));
    }
    spec.validate()?;
    let (m, n) = spec.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let k: LinearMap = match spec.family {
        Family::Matgame1 => {
            let dist = Uniform::new_inclusive(-1.0, 1.0);
            DenseMatrix::from_fn(m, n, |_, _| dist.sample(&mut rng)).into()
        }
        Family::Matgame2 | Family::Matgame3 => {
            DenseMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng)).into()
        }
        Family::Matgame4 => sparse_uniform(m, n, 0.10, &mut rng)?.into(),
        _ => unreachable!(),
    };
    SaddleProblem::new(
        k,
        Prox::Simplex,
        Prox::Simplex,
        MetricKind::GameGap,
        vec![1.0 / n as f64; n],
        vec![1.0 / m as f64; m],
    )
}

fn sparse_uniform(m: usize, n: usize, density: f64, rng: &mut ChaCha8Rng) -> Result<CsrMatrix> {
    let nnz = (density * (m * n) as f64).floor() as usize;
    let mut positions = index::sample(rng, m * n, nnz).into_vec();
    positions.sort_unstable();
    let dist = Uniform::new_inclusive(0.0, 1.0);
    let mut indptr = vec![0usize; m + 1];
    let mut indices = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    for pos in positions {
        let (i, j) = (pos / n, pos % n);
        indptr[i + 1] += 1;
        indices.push(j);
        values.push(dist.sample(rng));
    }
    for i in 0..m {
        indptr[i + 1] += indptr[i];
    }
    CsrMatrix::new(m, n, indptr, indices, values)
}

/// A LASSO instance together with its planted signal and noise.
#[derive(Debug, Clone)]
pub struct LassoInstance {
    pub problem: SaddleProblem,
    pub signal: Vec<f64>,
    pub noise: Vec<f64>,
}

/// Default regularization weight of the LASSO families.
pub const LASSO_LAMBDA: f64 = 0.1;
/// Default noise standard deviation of the LASSO families.
pub const LASSO_NOISE_STD: f64 = 0.1;

/// LASSO problem `min ||Kx - b||^2 / 2 + 0.1 ||x||_1` with `b = Kw + v`.
pub fn gen_lasso(spec: &GeneratorSpec) -> Result<SaddleProblem> {
    gen_lasso_instance(spec).map(|inst| inst.problem)
}

/// Like [`gen_lasso`] but also returns the planted signal `w` and noise `v`.
///
/// Families 1 and 2 use i.i.d. standard normal designs. Families 3 and 4
/// draw `B` with standard normal entries and build columns
/// `K_1 = B_1 / sqrt(1 - p^2)`, `K_j = p K_{j-1} + B_j`. The signal has
/// `s` entries uniform in [-10, 10] at uniformly chosen coordinates.
pub fn gen_lasso_instance(spec: &GeneratorSpec) -> Result<LassoInstance> {
    if spec.family.is_matgame() {
        return Err(Error::InvalidArgument(format!(
            "{} is not a LASSO family",
            spec.family
        )));
    }
    spec.validate()?;
    let (m, n) = spec.dims();
    let s = spec.sparsity();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut k = DenseMatrix::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng));
    if let Some(p) = spec.correlation.or(spec.family.correlation()) {
        // Rows of B are transformed in place: column j becomes p * K_{j-1} + B_j.
        let first = 1.0 / (1.0 - p * p).sqrt();
        let mut data = k.data().to_vec();
        for row in data.chunks_mut(n) {
            row[0] *= first;
            for j in 1..n {
                row[j] += p * row[j - 1];
            }
        }
        k = DenseMatrix::new(m, n, data)?;
    }
    let k: LinearMap = k.into();

    let mut signal = vec![0.0; n];
    let amp = Uniform::new_inclusive(-10.0, 10.0);
    let mut support = index::sample(&mut rng, n, s).into_vec();
    support.sort_unstable();
    for j in support {
        signal[j] = amp.sample(&mut rng);
    }
    let noise_std = spec.noise_std.unwrap_or(LASSO_NOISE_STD);
    let noise: Vec<f64> = (0..m)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            noise_std * z
        })
        .collect();
    let mut b = k.apply(&signal)?;
    for (bi, vi) in b.iter_mut().zip(&noise) {
        *bi += vi;
    }

    // x0 = 0, y0 = K x0 - b = -b.
    let y0: Vec<f64> = b.iter().map(|t| -t).collect();
    let problem = SaddleProblem::new(
        k,
        Prox::L1 {
            lambda: LASSO_LAMBDA,
        },
        Prox::LassoDual { b },
        MetricKind::ObjectiveError,
        vec![0.0; n],
        y0,
    )?;
    Ok(LassoInstance {
        problem,
        signal,
        noise,
    })
}
