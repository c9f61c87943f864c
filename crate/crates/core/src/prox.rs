//! Proximal operators and projections.
//!
//! `Prox_{t h}(v) = argmin_u { h(u) + ||u - v||^2 / (2t) }`.

use serde::{Deserialize, Serialize};

use crate::vector::{check_len, dot};
use crate::{Error, Result};

/// Entries smaller than this after simplex clamping are snapped to zero.
const SIMPLEX_SNAP: f64 = 1e-15;

/// Closed-form affine prox cases usable inside a linesearch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AffineCase {
    /// `h(y) = <b, y>`
    Linear { b: Vec<f64> },
    /// `h(y) = ||y - b||^2 / 2`
    QuadraticShift { b: Vec<f64> },
    /// indicator of `{ u : <a, u> = b }`
    HyperplaneIndicator { a: Vec<f64>, b: f64 },
}

impl AffineCase {
    pub fn hyperplane(a: Vec<f64>, b: f64) -> Result<Self> {
        if a.iter().all(|&t| t == 0.0) {
            return Err(Error::InvalidArgument(
                "hyperplane normal must be nonzero".into(),
            ));
        }
        Ok(AffineCase::HyperplaneIndicator { a, b })
    }

    fn dim(&self) -> usize {
        match self {
            AffineCase::Linear { b } | AffineCase::QuadraticShift { b } => b.len(),
            AffineCase::HyperplaneIndicator { a, .. } => a.len(),
        }
    }
}

/// A proper closed convex function together with its proximal map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prox {
    /// `h = 0`; the prox is the identity.
    Zero,
    /// Indicator of the unit simplex.
    Simplex,
    /// `lambda * ||.||_1`
    L1 {
        lambda: f64,
    },
    /// `f*(y) = ||y + b||^2 / 2 - ||b||^2 / 2`, the conjugate of `||z - b||^2 / 2`.
    LassoDual {
        b: Vec<f64>,
    },
    Affine(AffineCase),
}

impl Prox {
    /// Strong-convexity modulus of the underlying function.
    pub fn modulus(&self) -> f64 {
        match self {
            Prox::LassoDual { .. } | Prox::Affine(AffineCase::QuadraticShift { .. }) => 1.0,
            _ => 0.0,
        }
    }

    /// Dimension the operator is tied to, if any.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Prox::LassoDual { b } => Some(b.len()),
            Prox::Affine(c) => Some(c.dim()),
            _ => None,
        }
    }

    pub fn apply(&self, step: f64, v: &[f64]) -> Result<Vec<f64>> {
        if !(step > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "prox step must be positive, got {step}"
            )));
        }
        if let Some(d) = self.dim() {
            check_len(v, d)?;
        }
        if let Prox::Affine(AffineCase::HyperplaneIndicator { a, .. }) = self {
            if a.iter().all(|&t| t == 0.0) {
                return Err(Error::InvalidArgument(
                    "hyperplane normal must be nonzero".into(),
                ));
            }
        }
        let mut out = v.to_vec();
        self.apply_in_place(step, &mut out);
        Ok(out)
    }

    /// Overwrites `v` with `Prox_{step h}(v)`. Arguments are assumed valid.
    pub fn apply_in_place(&self, step: f64, v: &mut [f64]) {
        match self {
            Prox::Zero => {}
            Prox::Simplex => project_simplex_in_place(v),
            Prox::L1 { lambda } => soft_threshold_in_place(step * lambda, v),
            Prox::LassoDual { b } => {
                let scale = 1.0 / (1.0 + step);
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi = (*vi - step * bi) * scale;
                }
            }
            Prox::Affine(case) => affine_in_place(case, step, v),
        }
    }

    /// Function value at `u`; `+inf` outside the domain of an indicator.
    pub fn value(&self, u: &[f64]) -> f64 {
        match self {
            Prox::Zero => 0.0,
            Prox::Simplex => {
                let sum: f64 = u.iter().sum();
                let min = u.iter().copied().fold(f64::INFINITY, f64::min);
                if (sum - 1.0).abs() <= 1e-9 && min >= -1e-12 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Prox::L1 { lambda } => lambda * u.iter().map(|t| t.abs()).sum::<f64>(),
            Prox::LassoDual { b } => {
                let shifted: f64 = u.iter().zip(b).map(|(y, b)| (y + b) * (y + b)).sum();
                0.5 * shifted - 0.5 * dot(b, b)
            }
            Prox::Affine(AffineCase::Linear { b }) => dot(b, u),
            Prox::Affine(AffineCase::QuadraticShift { b }) => {
                0.5 * u.iter().zip(b).map(|(y, b)| (y - b) * (y - b)).sum::<f64>()
            }
            Prox::Affine(AffineCase::HyperplaneIndicator { a, b }) => {
                let scale = a.iter().map(|t| t.abs()).sum::<f64>().max(1.0);
                if (dot(a, u) - b).abs() <= 1e-9 * scale {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }
}

fn soft_threshold_in_place(threshold: f64, v: &mut [f64]) {
    for vi in v.iter_mut() {
        let mag = vi.abs() - threshold;
        *vi = if mag > 0.0 { vi.signum() * mag } else { 0.0 };
    }
}

fn affine_in_place(case: &AffineCase, step: f64, v: &mut [f64]) {
    match case {
        AffineCase::Linear { b } => {
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= step * bi;
            }
        }
        AffineCase::QuadraticShift { b } => {
            let scale = 1.0 / (1.0 + step);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi = (*vi + step * bi) * scale;
            }
        }
        AffineCase::HyperplaneIndicator { a, b } => {
            let coef = (b - dot(a, v)) / dot(a, a);
            for (vi, ai) in v.iter_mut().zip(a) {
                *vi += coef * ai;
            }
        }
    }
}

/// Componentwise soft-thresholding, the prox of `step * lambda * ||.||_1`.
pub fn prox_l1(step: f64, lambda: f64, v: &[f64]) -> Result<Vec<f64>> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be nonnegative, got {lambda}"
        )));
    }
    Prox::L1 { lambda }.apply(step, v)
}

/// `(v - step * b) / (1 + step)`
pub fn prox_lasso_dual(step: f64, b: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    Prox::LassoDual { b: b.to_vec() }.apply(step, v)
}

/// Euclidean projection onto the unit simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    project_simplex_in_place(&mut out);
    out
}

/// Sort-based threshold projection onto `{ z >= 0, sum z = 1 }`.
pub fn project_simplex_in_place(v: &mut [f64]) {
    if v.is_empty() {
        return;
    }
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut threshold = sorted[0] - 1.0;
    for (k, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if u - t > 0.0 {
            threshold = t;
        } else {
            break;
        }
    }
    for vi in v.iter_mut() {
        let z = *vi - threshold;
        *vi = if z > SIMPLEX_SNAP { z } else { 0.0 };
    }
}

/// Closed-form prox for the affine cases.
pub fn prox_affine_cases(case: &AffineCase, step: f64, v: &[f64]) -> Result<Vec<f64>> {
    Prox::Affine(case.clone()).apply(step, v)
}

/// Largest violation of the prox characterization
/// `<p - v, y - p> >= step * (h(p) - h(y))` over the probe points `y`.
///
/// Returns 0 when every probe satisfies the inequality. Probes outside the
/// domain of `h` are vacuous.
pub fn prox_residual(
    h: impl Fn(&[f64]) -> f64,
    step: f64,
    v: &[f64],
    p: &[f64],
    probes: &[Vec<f64>],
) -> f64 {
    let hp = h(p);
    let diff: Vec<f64> = p.iter().zip(v).map(|(a, b)| a - b).collect();
    probes
        .iter()
        .map(|y| {
            let hy = h(y);
            if !hy.is_finite() {
                return 0.0;
            }
            let lhs: f64 = diff
                .iter()
                .zip(y)
                .zip(p)
                .map(|((d, y), p)| d * (y - p))
                .sum();
            step * (hp - hy) - lhs
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_soft_threshold() {
        assert_eq!(prox_l1(0.5, 1.0, &[2.0, -0.3]).unwrap(), vec![1.5, 0.0]);
        assert_eq!(prox_l1(0.7, 0.0, &[2.0, -0.3]).unwrap(), vec![2.0, -0.3]);
        assert_eq!(prox_l1(1.0, 3.0, &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!(prox_l1(1.0, -1.0, &[1.0]).is_err());
        assert!(prox_l1(0.0, 1.0, &[1.0]).is_err());
    }

    #[test]
    fn l1_subgradient_condition() {
        // v - p must lie in t*lambda * subdiff ||.||_1 at p.
        let (t, v) = (0.5, [2.0, -0.3]);
        let p = prox_l1(t, 1.0, &v).unwrap();
        assert!((v[0] - p[0] - 0.5).abs() < 1e-15);
        assert!((v[1] - p[1]).abs() <= 0.5);
    }

    #[test]
    fn lasso_dual_cases() {
        assert_eq!(
            prox_lasso_dual(1.0, &[1.0, 0.0], &[1.0, 1.0]).unwrap(),
            vec![0.0, 0.5]
        );
        assert_eq!(
            prox_lasso_dual(3.0, &[0.0, 0.0], &[4.0, -8.0]).unwrap(),
            vec![1.0, -2.0]
        );
        assert_eq!(
            prox_lasso_dual(1.0, &[2.0, 2.0], &[2.0, 2.0]).unwrap(),
            vec![0.0, 0.0]
        );
        assert!(prox_lasso_dual(1.0, &[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn lasso_dual_stationarity() {
        let (t, b, v) = (0.7, [1.5, -2.0, 0.25], [0.3, 4.0, -1.0]);
        let u = prox_lasso_dual(t, &b, &v).unwrap();
        for i in 0..3 {
            assert!((u[i] - v[i] + t * (u[i] + b[i])).abs() < 1e-14);
        }
    }

    #[test]
    fn simplex_cases() {
        assert_eq!(project_simplex(&[1.0, 0.0, 0.0]), vec![1.0, 0.0, 0.0]);
        for c in [-5.0, 0.0, 1.0 / 3.0, 12.5] {
            let p = project_simplex(&[c, c, c]);
            for pi in p {
                assert!((pi - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        let p = project_simplex(&[1.0, 0.2]);
        assert!((p[0] - 0.9).abs() < 1e-15 && (p[1] - 0.1).abs() < 1e-15);
        assert_eq!(project_simplex(&[-3.0]), vec![1.0]);
        assert!(project_simplex(&[]).is_empty());
    }

    #[test]
    fn simplex_ties_and_clamping() {
        let p = project_simplex(&[2.0, 2.0, -1.0, 2.0]);
        assert_eq!(p[2], 0.0);
        assert!(p[2].is_sign_positive());
        for i in [0, 1, 3] {
            assert!((p[i] - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn affine_cases() {
        let lin = AffineCase::Linear { b: vec![1.0, 1.0] };
        assert_eq!(
            prox_affine_cases(&lin, 2.0, &[5.0, 5.0]).unwrap(),
            vec![3.0, 3.0]
        );

        let quad = AffineCase::QuadraticShift { b: vec![0.0] };
        assert_eq!(prox_affine_cases(&quad, 1.0, &[4.0]).unwrap(), vec![2.0]);

        let hyper = AffineCase::hyperplane(vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(
            prox_affine_cases(&hyper, 1.0, &[3.0, 7.0]).unwrap(),
            vec![0.0, 7.0]
        );
    }

    #[test]
    fn hyperplane_zero_normal_rejected() {
        assert!(AffineCase::hyperplane(vec![0.0, 0.0], 1.0).is_err());
        let raw = AffineCase::HyperplaneIndicator {
            a: vec![0.0, 0.0],
            b: 1.0,
        };
        assert!(prox_affine_cases(&raw, 1.0, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn hyperplane_matches_least_squares_projection() {
        // Minimum-norm correction d with <a, u + d> = b is d = a (b - <a,u>) / ||a||^2;
        // check optimality directly: result feasible and u - p parallel to a.
        let a = vec![1.0, -2.0, 0.5];
        let u = [0.3, 1.1, -4.0];
        let p =
            prox_affine_cases(&AffineCase::hyperplane(a.clone(), 2.0).unwrap(), 1.0, &u).unwrap();
        assert!((dot(&a, &p) - 2.0).abs() < 1e-14);
        let d: Vec<f64> = u.iter().zip(&p).map(|(u, p)| u - p).collect();
        let ratio = d[0] / a[0];
        for i in 0..3 {
            assert!((d[i] - ratio * a[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn moduli() {
        assert_eq!(Prox::LassoDual { b: vec![] }.modulus(), 1.0);
        assert_eq!(Prox::Simplex.modulus(), 0.0);
        assert_eq!(Prox::L1 { lambda: 1.0 }.modulus(), 0.0);
    }

    #[test]
    fn residual_certifies_and_detects() {
        let h = |u: &[f64]| 1.3 * u.iter().map(|t| t.abs()).sum::<f64>();
        let v = [2.0, -0.3, 0.9, -4.0];
        let step = 0.4;
        let p = prox_l1(step, 1.3, &v).unwrap();
        // Probes scattered around the prox point at a few radii.
        let probes: Vec<Vec<f64>> = (0..100)
            .map(|i| {
                let radius = [1.0, 0.1, 0.01, 0.001][i % 4];
                (0..4)
                    .map(|j| p[j] + radius * (((i * 31 + j * 17) % 23) as f64 / 11.0 - 1.0))
                    .collect()
            })
            .collect();
        assert!(prox_residual(h, step, &v, &p, &probes) <= 1e-10);

        let mut bad = p.clone();
        bad[0] += 0.1;
        assert!(prox_residual(h, step, &v, &bad, &probes) > 0.0);

        let tiny = 1e-12;
        assert!(prox_residual(h, tiny, &v, &v, &probes) < 1e-9);
    }
}
