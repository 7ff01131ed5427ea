mod common;

use common::*;
use pess_core::dense::{eig_general, lu_solve};
use pess_core::experiments::{choice_config, run_solve, GssChoice, PrecondChoice};
use pess_core::params::{phi, phi_direct, phi_minimizer, PhiTerms};
use pess_core::precond::{make_config, BuildStrategy, ExactPreconditioner, SpdOperator};
use pess_core::problems::c_ct;
use pess_core::{estimate_params, example1, gmres, BlockVector, Case, GssKind, GssPreconditioner};
use proptest::prelude::*;

fn assert_monotone(history: &[f64]) {
    for w in history.windows(2) {
        assert!(w[1] <= w[0] * (1.0 + 1e-12), "residual rose from {} to {}", w[0], w[1]);
    }
}

#[test]
fn residual_history_nonincreasing() {
    let mut r = rng(11);
    for _ in 0..8 {
        let dims = random_dims(&mut r, 20);
        let sys = random_system(&mut r, dims, 1.0, 1.0);
        let plain = gmres(&sys, None, &sys.rhs_for_ones(), 1e-10, 500).unwrap();
        assert!(plain.converged);
        assert_monotone(&plain.res_history);
        let cfg = random_pess(&mut r, &sys, 2.0);
        let pc = GssPreconditioner::build(&sys, &cfg, BuildStrategy::Dense).unwrap();
        let pre = gmres(&sys, Some(&pc), &sys.rhs_for_ones(), 1e-10, 500).unwrap();
        assert!(pre.converged);
        assert_monotone(&pre.res_history);
    }
}

#[test]
fn preconditioned_solution_matches_plain() {
    let sys = example1(4).unwrap();
    let plain = gmres(&sys, None, &sys.rhs_for_ones(), 1e-10, 500).unwrap();
    for case in [Case::I, Case::II] {
        for kind in GssKind::ALL {
            let choice = PrecondChoice::Gss(GssChoice::new(kind, case, 3.0));
            let out = run_solve(&sys, "ex1", &choice, 1e-10, 500).unwrap();
            let diff = out
                .report
                .solution
                .to_flat()
                .iter()
                .zip(plain.solution.to_flat())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(diff < 1e-5, "{}: {diff}", choice.label());
            assert_monotone(&out.report.res_history);
        }
    }
}

#[test]
fn exact_preconditioner_needs_one_step() {
    let mut r = rng(12);
    for _ in 0..5 {
        let dims = random_dims(&mut r, 15);
        let sys = random_system(&mut r, dims, 1.0, 1.0);
        let exact = ExactPreconditioner::for_system(&sys).unwrap();
        let out = gmres(&sys, Some(&exact), &sys.rhs_for_ones(), 1e-8, 10).unwrap();
        assert_eq!(out.iterations, 1);
    }
}

#[test]
fn gmres_input_errors() {
    let sys = example1(2).unwrap();
    let (n, m, p) = sys.dims();
    assert!(gmres(&sys, None, &BlockVector::zeros(n, m, p), 1e-6, 10).is_err());
    assert!(gmres(&sys, None, &BlockVector::ones(n, m, 1), 1e-6, 10).is_err());
}

#[test]
fn operator_matches_dense_and_rhs() {
    let mut r = rng(13);
    for _ in 0..5 {
        let dims = random_dims(&mut r, 20);
        let sys = random_system(&mut r, dims, 1.0, 1.0);
        let dense = sys.to_dense().unwrap();
        let x = random_vec(&mut r, sys.size());
        let (n, m, _) = sys.dims();
        let got = sys.operator_apply(&BlockVector::from_flat(&x, n, m)).unwrap().to_flat();
        assert!(rel_err(&got, &dense.matvec(&x).unwrap()) < 1e-13);

        let u = lu_solve(&dense, &sys.rhs_for_ones().to_flat()).unwrap();
        assert!(u.iter().all(|v| (v - 1.0).abs() < 1e-9));

        let spectrum = eig_general(&dense).unwrap();
        assert!(spectrum.eigenvalues.iter().all(|z| z.re > 0.0), "not positive stable");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn phi_closed_form_matches_direct(seed in any::<u64>(), s in -5.0f64..20.0, lpess in any::<bool>()) {
        let mut r = rng(seed);
        let dims = random_dims(&mut r, 10);
        let sys = random_system(&mut r, dims, 1.0, 1.0);
        let cfg = make_config(random_spec(&mut r, dims, lpess as usize, 1.0), dims).unwrap();
        let closed = phi(&sys, &cfg, s);
        let direct = phi_direct(&sys, &cfg, s).unwrap();
        prop_assert!((closed - direct).abs() < 1e-10 * closed, "{} vs {}", closed, direct);
    }

    #[test]
    fn phi_is_convex(seed in any::<u64>(), s in -5.0f64..20.0, h in 0.01f64..5.0) {
        let mut r = rng(seed);
        let dims = random_dims(&mut r, 10);
        let sys = random_system(&mut r, dims, 1.0, 1.0);
        let cfg = random_pess(&mut r, &sys, 1.0);
        let t = PhiTerms::new(&sys, &cfg);
        let second = t.phi(s - h) - 2.0 * t.phi(s) + t.phi(s + h);
        prop_assert!(second > 0.0);
        let smin = phi_minimizer(&sys, &cfg);
        prop_assert!(t.phi(smin) <= t.phi(smin + h) && t.phi(smin) <= t.phi(smin - h));
    }
}

#[test]
fn estimates_are_bit_stable() {
    let sys = example1(6).unwrap();
    let l3 = SpdOperator::Matrix(c_ct(&sys).unwrap().scale(1e-4));
    let a = estimate_params(&sys, &l3).unwrap();
    let b = estimate_params(&sys, &l3).unwrap();
    assert_eq!(a.s_est.to_bits(), b.s_est.to_bits());
    assert_eq!(a.beta_est.to_bits(), b.beta_est.to_bits());
    assert!(a.norms.converged);
    let est = PrecondChoice::Estimated {
        lpess: false,
        lambda3_coef: 1e-4,
    };
    let cfg = choice_config(&sys, &est).unwrap().unwrap();
    assert_eq!(cfg.s.to_bits(), a.s_est.to_bits());
}
