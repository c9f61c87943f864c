mod common;

use common::{random_dense, random_vec, rng};
use proptest::prelude::*;
use rand::Rng;
use saddle_core::linops::{CsrMatrix, DenseMatrix, LinearMap};
use saddle_core::vector::{dot, norm};

fn random_sparse(seed: u64, m: usize, n: usize, density: f64) -> DenseMatrix {
    let mut r = rng(seed);
    DenseMatrix::from_fn(m, n, |_, _| {
        if r.gen::<f64>() < density {
            r.gen_range(-2.0..2.0)
        } else {
            0.0
        }
    })
}

#[test]
fn csr_matches_dense_on_small_random_matrix() {
    let dense = random_sparse(11, 5, 3, 0.4);
    let csr: LinearMap = CsrMatrix::from_dense(&dense).into();
    let dense: LinearMap = dense.into();
    let mut r = rng(12);
    for _ in 0..50 {
        let x = random_vec(&mut r, 3, 3.0);
        let y = random_vec(&mut r, 5, 3.0);
        for (a, b) in csr.apply(&x).unwrap().iter().zip(dense.apply(&x).unwrap()) {
            assert!((a - b).abs() <= 1e-15);
        }
        for (a, b) in csr
            .apply_transpose(&y)
            .unwrap()
            .iter()
            .zip(dense.apply_transpose(&y).unwrap())
        {
            assert!((a - b).abs() <= 1e-15);
        }
    }
}

#[test]
fn adjoint_identity_on_random_triples() {
    let mut r = rng(7);
    for t in 0..1000 {
        let (m, n) = (r.gen_range(1..12), r.gen_range(1..12));
        let dense = random_dense(&mut r, m, n);
        let k: LinearMap = if t % 2 == 0 {
            dense.into()
        } else {
            CsrMatrix::from_dense(&dense).into()
        };
        let x = random_vec(&mut r, n, 5.0);
        let y = random_vec(&mut r, m, 5.0);
        let lhs = dot(&k.apply(&x).unwrap(), &y);
        let rhs = dot(&x, &k.apply_transpose(&y).unwrap());
        let scale = 1.0 + norm(&x) * norm(&y) * k.frobenius_norm();
        assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");
    }
}

#[test]
fn operator_norm_matches_dense_eigensolver() {
    let mut r = rng(2024);
    let dense = random_dense(&mut r, 50, 30);
    let k: LinearMap = dense.clone().into();
    let estimate = k.operator_norm(1e-6, 1000).unwrap();

    let a = nalgebra::DMatrix::from_row_slice(50, 30, dense.data());
    let gram = a.transpose() * &a;
    let eig = nalgebra::SymmetricEigen::new(gram);
    let exact = eig.eigenvalues.iter().copied().fold(0.0, f64::max).sqrt();
    assert!(
        (estimate - exact).abs() / exact <= 1e-6,
        "estimate {estimate} vs exact {exact}"
    );
}

#[test]
fn operator_norm_bounds_random_images() {
    let mut r = rng(5);
    let k: LinearMap = random_dense(&mut r, 40, 25).into();
    let tol = 1e-6;
    let l = k.operator_norm(tol, 1000).unwrap();
    for _ in 0..100 {
        let x = random_vec(&mut r, 25, 1.0);
        assert!(norm(&k.apply(&x).unwrap()) <= (1.0 + tol) * l * norm(&x));
    }
}

#[test]
fn operator_norm_sparse_equals_dense() {
    let dense = random_sparse(99, 60, 80, 0.1);
    let from_dense: LinearMap = dense.clone().into();
    let csr: LinearMap = CsrMatrix::from_dense(&dense).into();
    let a = from_dense.operator_norm(1e-8, 5000).unwrap();
    let b = csr.operator_norm(1e-8, 5000).unwrap();
    assert!((a - b).abs() <= 1e-10 * a);
}

proptest! {
    #[test]
    fn csr_and_dense_agree(seed in any::<u64>(), m in 1usize..15, n in 1usize..15, density in 0.0f64..1.0) {
        let dense = random_sparse(seed, m, n, density);
        let csr: LinearMap = CsrMatrix::from_dense(&dense).into();
        let dense: LinearMap = dense.into();
        let mut r = rng(seed.wrapping_add(1));
        let x = random_vec(&mut r, n, 2.0);
        let y = random_vec(&mut r, m, 2.0);
        let (a, b) = (csr.apply(&x).unwrap(), dense.apply(&x).unwrap());
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() <= 1e-15);
        }
        let (a, b) = (csr.apply_transpose(&y).unwrap(), dense.apply_transpose(&y).unwrap());
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() <= 1e-15);
        }
    }
}
