mod common;

use common::*;
use pess_core::dense::{cholesky, cond2, eig_general, eig_symmetric, gen_eig_spd, DenseMatrix};
use pess_core::SparseMatrix;
use proptest::prelude::*;
use rand::Rng;

/// Random sparse matrix with roughly `density` of its entries set.
fn random_sparse(seed: u64, rows: usize, cols: usize, density: f64) -> SparseMatrix {
    let mut r = rng(seed);
    let mut entries = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            if r.random_bool(density) {
                entries.push((i, j, r.random_range(-2.0..2.0)));
            }
        }
    }
    SparseMatrix::from_triplets(rows, cols, &entries).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn transpose_twice_is_identity(seed in any::<u64>(), rows in 1usize..30, cols in 1usize..30) {
        let m = random_sparse(seed, rows, cols, 0.3);
        prop_assert_eq!(m.transpose().transpose(), m);
    }

    #[test]
    fn matvec_matches_dense(seed in any::<u64>(), rows in 1usize..50, cols in 1usize..50) {
        let m = random_sparse(seed, rows, cols, 0.25);
        let x = random_vec(&mut rng(seed ^ 1), cols);
        let want = m.to_dense().matvec(&x).unwrap();
        let got = m.matvec(&x).unwrap();
        let scale = want.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-14 * scale);
        }
        let y = random_vec(&mut rng(seed ^ 2), rows);
        let want_t = m.to_dense().matvec_transpose(&y).unwrap();
        prop_assert!(rel_err(&m.matvec_transpose(&y).unwrap(), &want_t) < 1e-14);
    }

    #[test]
    fn kron_mixed_product(seed in any::<u64>(), a in 1usize..6, b in 1usize..6, c in 1usize..6, d in 1usize..6) {
        let x = random_sparse(seed, a, b, 0.6);
        let y = random_sparse(seed ^ 5, c, d, 0.6);
        let mut r = rng(seed ^ 9);
        let u = random_vec(&mut r, b);
        let v = random_vec(&mut r, d);
        let uv: Vec<f64> = u.iter().flat_map(|p| v.iter().map(move |q| p * q)).collect();
        let lhs = x.kron(&y).unwrap().matvec(&uv).unwrap();
        let (xu, yv) = (x.matvec(&u).unwrap(), y.matvec(&v).unwrap());
        let rhs: Vec<f64> = xu.iter().flat_map(|p| yv.iter().map(move |q| p * q)).collect();
        for (l, r) in lhs.iter().zip(&rhs) {
            prop_assert!((l - r).abs() <= 1e-13 * (1.0 + r.abs()));
        }
    }

    #[test]
    fn spmm_identity(seed in any::<u64>(), rows in 1usize..25, cols in 1usize..25) {
        let m = random_sparse(seed, rows, cols, 0.3);
        prop_assert_eq!(m.spmm(&SparseMatrix::identity(cols)).unwrap(), m);
    }

    #[test]
    fn norm2_below_frobenius(seed in any::<u64>(), rows in 1usize..20, cols in 1usize..20) {
        let m = random_sparse(seed, rows, cols, 0.5);
        let est = m.norm2_estimate(1e-10, 5000);
        prop_assert!(est.value <= m.frobenius_norm() * (1.0 + 1e-12));
    }

    #[test]
    fn cholesky_reconstructs(seed in any::<u64>(), k in 1usize..60) {
        let s = random_spd(&mut rng(seed), k, 0.1);
        let l = cholesky(&s).unwrap();
        let err = l.reconstruct().add_scaled(1.0, &s, -1.0).unwrap().frobenius_norm();
        prop_assert!(err < 1e-12 * s.frobenius_norm());
    }

    #[test]
    fn symmetric_eigen_trace_and_shift(seed in any::<u64>(), k in 1usize..25, c in -3.0f64..3.0) {
        let s = random_spd(&mut rng(seed), k, 0.0);
        let ev = eig_symmetric(&s).unwrap();
        let sum: f64 = ev.iter().sum();
        prop_assert!((sum - s.trace()).abs() <= 1e-10 * s.trace().abs().max(1.0));
        let shifted = eig_symmetric(&s.add_scaled(1.0, &DenseMatrix::identity(k), c).unwrap()).unwrap();
        for (a, b) in ev.iter().zip(&shifted) {
            prop_assert!((a + c - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn general_eigen_on_symmetric_input(seed in any::<u64>(), k in 1usize..25) {
        let s = random_spd(&mut rng(seed), k, -0.3);
        let sym = eig_symmetric(&s).unwrap();
        let gen = eig_general(&s).unwrap().sorted();
        for (a, z) in sym.iter().zip(&gen) {
            prop_assert!((a - z.re).abs() <= 1e-8 * (1.0 + a.abs()) && z.im.abs() <= 1e-8);
        }
    }

    #[test]
    fn gen_eig_congruence_scaling(seed in any::<u64>(), k in 1usize..15, c in 0.1f64..10.0) {
        let mut r = rng(seed);
        let s = random_spd(&mut r, k, 0.0);
        let t = random_spd(&mut r, k, 0.5);
        let base = gen_eig_spd(&s, &t).unwrap();
        let scaled = gen_eig_spd(&s.scale(c), &t.scale(c)).unwrap();
        for (a, b) in base.iter().zip(&scaled) {
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn cond2_scale_invariant(seed in any::<u64>(), k in 1usize..15, c in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0]) {
        let m = gaussian(&mut rng(seed), k, k);
        let base = cond2(&m).unwrap();
        // cond2 goes through the Gram matrix, so its relative accuracy is O(ε·κ²).
        let tol = 1e-12 + 16.0 * f64::EPSILON * base * base;
        prop_assert!((cond2(&m.scale(c)).unwrap() - base).abs() <= tol * base);
    }
}

#[test]
fn rank_one_norm_is_frobenius() {
    let u = SparseMatrix::from_triplets(4, 1, &[(0, 0, 1.0), (1, 0, -2.0), (3, 0, 0.5)]).unwrap();
    let v = SparseMatrix::from_triplets(1, 3, &[(0, 0, 3.0), (0, 2, 1.0)]).unwrap();
    let m = u.spmm(&v).unwrap();
    let est = m.norm2_estimate(1e-12, 5000);
    assert!((est.value - m.frobenius_norm()).abs() < 1e-9 * m.frobenius_norm());
}

#[test]
fn duplicates_summed_and_zeros_dropped() {
    let m = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 1, 0.0), (1, 0, 1.0), (1, 0, -1.0)]).unwrap();
    assert_eq!(m.nnz(), 1);
    assert_eq!(m.get(0, 0), 3.0);
}
