//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use saddle_core::linops::DenseMatrix;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
}

pub fn random_dense(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn random_simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|t| t / s).collect()
}

/// Brute-force simplex projection: try every support set, keep the feasible
/// candidate closest to `v`.
pub fn simplex_projection_brute_force(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    assert!(n <= 16);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let shift = (support.iter().map(|&i| v[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut z = vec![0.0; n];
        let mut feasible = true;
        for &i in &support {
            z[i] = v[i] - shift;
            if z[i] < 0.0 {
                feasible = false;
            }
        }
        if !feasible {
            continue;
        }
        let d: f64 = z.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, z));
        }
    }
    best.unwrap().1
}

/// Solves `min_{x in simplex} max_{y in simplex} <Kx, y>` with two linear
/// programs. Returns `(x, y, value)`.
pub fn solve_matrix_game(k: &DenseMatrix) -> (Vec<f64>, Vec<f64>, f64) {
    let (m, n) = (k.rows(), k.cols());

    // min v  s.t.  (Kx)_i <= v,  sum x = 1,  x >= 0
    let mut primal = Problem::new(OptimizationDirection::Minimize);
    let xs: Vec<_> = (0..n)
        .map(|_| primal.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    let v = primal.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    for i in 0..m {
        let mut terms: Vec<_> = xs
            .iter()
            .enumerate()
            .map(|(j, &x)| (x, k.get(i, j)))
            .collect();
        terms.push((v, -1.0));
        primal.add_constraint(terms, ComparisonOp::Le, 0.0);
    }
    primal.add_constraint(
        xs.iter().map(|&x| (x, 1.0)).collect::<Vec<_>>(),
        ComparisonOp::Eq,
        1.0,
    );
    let sol = primal.solve().expect("primal LP");
    let x: Vec<f64> = xs.iter().map(|&x| sol[x].max(0.0)).collect();
    let value = sol.objective();

    // max w  s.t.  (K^T y)_j >= w,  sum y = 1,  y >= 0
    let mut dual = Problem::new(OptimizationDirection::Maximize);
    let ys: Vec<_> = (0..m)
        .map(|_| dual.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    let w = dual.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    for j in 0..n {
        let mut terms: Vec<_> = ys
            .iter()
            .enumerate()
            .map(|(i, &y)| (y, k.get(i, j)))
            .collect();
        terms.push((w, -1.0));
        dual.add_constraint(terms, ComparisonOp::Ge, 0.0);
    }
    dual.add_constraint(
        ys.iter().map(|&y| (y, 1.0)).collect::<Vec<_>>(),
        ComparisonOp::Eq,
        1.0,
    );
    let sol = dual.solve().expect("dual LP");
    let y: Vec<f64> = ys.iter().map(|&y| sol[y].max(0.0)).collect();
    (normalize(x), normalize(y), value)
}

fn normalize(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|t| t / s).collect()
}
