#![allow(dead_code)]

use pess_core::dense::DenseMatrix;
use pess_core::precond::{make_config, GssConfig, GssSpec, SpdOperator};
use pess_core::{SaddlePointSystem, SparseMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let values = (0..rows * cols).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    DenseMatrix::from_row_major(rows, cols, values).unwrap()
}

/// `MᵀM/k + shift·I`, symmetric to the last bit.
pub fn random_spd(rng: &mut ChaCha8Rng, k: usize, shift: f64) -> DenseMatrix {
    let m = gaussian(rng, k, k);
    let mut s = m.transpose().matmul(&m).unwrap().scale(1.0 / k as f64);
    s.symmetrize();
    for i in 0..k {
        s.row_mut(i)[i] += shift;
    }
    s
}

pub fn random_vec(rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
    (0..k).map(|_| rng.sample(StandardNormal)).collect()
}

/// A validated system with `A` scaled by `a_scale` and `B`, `C` by `bc_scale`.
pub fn random_system(rng: &mut ChaCha8Rng, (n, m, p): (usize, usize, usize), a_scale: f64, bc_scale: f64) -> SaddlePointSystem {
    assert!(p <= m && m <= n);
    let a = random_spd(rng, n, 0.5).scale(a_scale);
    let b = gaussian(rng, m, n).scale(bc_scale);
    let c = gaussian(rng, p, m).scale(bc_scale);
    SaddlePointSystem::assemble(
        SparseMatrix::from_dense(&a),
        SparseMatrix::from_dense(&b),
        SparseMatrix::from_dense(&c),
    )
    .unwrap()
}

pub fn random_dims(rng: &mut ChaCha8Rng, max_n: usize) -> (usize, usize, usize) {
    let n = rng.random_range(3..=max_n);
    let m = rng.random_range(2..=n);
    let p = rng.random_range(1..=m);
    (n, m, p)
}

pub fn random_spd_op(rng: &mut ChaCha8Rng, k: usize) -> SpdOperator {
    if rng.random_bool(0.5) {
        SpdOperator::Diagonal((0..k).map(|_| rng.random_range(0.1..2.0)).collect())
    } else {
        SpdOperator::Matrix(SparseMatrix::from_dense(&random_spd(rng, k, 0.2)))
    }
}

/// One config of each kind with random SPD blocks.
pub fn random_spec(rng: &mut ChaCha8Rng, (n, m, p): (usize, usize, usize), kind: usize, s: f64) -> GssSpec {
    match kind % 6 {
        0 => GssSpec::Pess {
            lambda1: random_spd_op(rng, n),
            lambda2: random_spd_op(rng, m),
            lambda3: random_spd_op(rng, p),
            s,
        },
        1 => GssSpec::Lpess {
            lambda2: random_spd_op(rng, m),
            lambda3: random_spd_op(rng, p),
            s,
        },
        2 => GssSpec::Ss {
            alpha: rng.random_range(0.05..2.0),
        },
        3 => GssSpec::Rss {
            alpha: rng.random_range(0.05..2.0),
        },
        4 => GssSpec::Egss {
            alpha: rng.random_range(0.05..2.0),
            beta: rng.random_range(0.05..2.0),
            gamma: rng.random_range(0.001..2.0),
            p: random_spd_op(rng, n),
            q: random_spd_op(rng, m),
            w: random_spd_op(rng, p),
        },
        _ => GssSpec::Rpgss {
            beta: rng.random_range(0.05..2.0),
            gamma: rng.random_range(0.001..2.0),
            q: random_spd_op(rng, m),
            w: random_spd_op(rng, p),
        },
    }
}

pub fn random_pess(rng: &mut ChaCha8Rng, sys: &SaddlePointSystem, s: f64) -> GssConfig {
    make_config(random_spec(rng, sys.dims(), 0, s), sys.dims()).unwrap()
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den.max(f64::MIN_POSITIVE)
}
