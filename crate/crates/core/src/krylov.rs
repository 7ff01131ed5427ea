//! Full GMRES with optional right preconditioning.

use crate::dense::{axpy, dot, norm2};
use crate::error::{check_len, Error, Result};
use crate::precond::Preconditioner;
use crate::system::{BlockVector, SaddlePointSystem};
use serde::Serialize;

const BASIS_CHUNK: usize = 64;

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub solution: BlockVector,
    pub iterations: usize,
    pub converged: bool,
    /// Relative true residual after each Arnoldi step.
    pub res_history: Vec<f64>,
    pub final_res: f64,
}

/// `‖d − 𝒜u‖₂ / ‖d‖₂`.
pub fn true_residual(sys: &SaddlePointSystem, u: &BlockVector, d: &BlockVector) -> Result<f64> {
    let dn = d.norm2();
    if dn == 0.0 {
        return Err(Error::InvalidArgument("right-hand side is zero".into()));
    }
    let au = sys.operator_apply(u)?;
    check_len("rhs length", au.len(), d.len())?;
    let r = au
        .to_flat()
        .iter()
        .zip(d.to_flat())
        .map(|(a, b)| (b - a) * (b - a))
        .sum::<f64>()
        .sqrt();
    Ok(r / dn)
}

/// Solves `𝒜u = d` from `u₀ = 0` by full (non-restarted) GMRES.
///
/// With a preconditioner the iteration runs on `𝒜P⁻¹v = d` and returns
/// `u = P⁻¹v`. Arnoldi uses modified Gram-Schmidt and the least-squares
/// problem is updated with Givens rotations. After every step the current
/// iterate is formed and the true relative residual recomputed; the loop stops
/// once it drops below `tol` or after `maxit` steps.
pub fn gmres(
    sys: &SaddlePointSystem,
    precond: Option<&dyn Preconditioner>,
    d: &BlockVector,
    tol: f64,
    maxit: usize,
) -> Result<SolveReport> {
    let size = sys.size();
    check_len("rhs length", size, d.len())?;
    if let Some(p) = precond {
        check_len("preconditioner order", size, p.order())?;
    }
    let (n, m, _) = sys.dims();
    let apply = |x: &[f64], y: &mut [f64]| sys.apply_flat(x, y);
    let papply = precond.map(|p| move |x: &[f64], y: &mut [f64]| p.apply_flat(x, y));
    let (u, history, converged) = match &papply {
        Some(f) => gmres_operator(size, apply, Some(f), &d.to_flat(), tol, maxit)?,
        None => gmres_operator(size, apply, None::<&fn(&[f64], &mut [f64])>, &d.to_flat(), tol, maxit)?,
    };
    let final_res = *history.last().expect("at least one step");
    Ok(SolveReport {
        solution: BlockVector::from_flat(&u, n, m),
        iterations: history.len(),
        converged,
        res_history: history,
        final_res,
    })
}

/// Matrix-free form of [`gmres`] for an arbitrary operator of order `size`.
///
/// Returns the iterate, the relative true-residual history and whether `tol`
/// was reached.
pub fn gmres_operator<A, P>(
    size: usize,
    apply: A,
    precond: Option<&P>,
    rhs: &[f64],
    tol: f64,
    maxit: usize,
) -> Result<(Vec<f64>, Vec<f64>, bool)>
where
    A: Fn(&[f64], &mut [f64]),
    P: Fn(&[f64], &mut [f64]),
{
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    if maxit == 0 {
        return Err(Error::InvalidArgument("maxit must be at least 1".into()));
    }
    check_len("rhs length", size, rhs.len())?;
    let beta = norm2(rhs);
    if beta == 0.0 {
        return Err(Error::InvalidArgument("right-hand side is zero".into()));
    }

    let mut basis: Vec<f64> = Vec::with_capacity(BASIS_CHUNK.min(maxit + 1) * size);
    basis.extend(rhs.iter().map(|v| v / beta));
    // column k of the Hessenberg matrix, already rotated, has k+2 entries
    let mut hcols: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<f64> = Vec::new();
    let mut g = vec![beta];

    let mut z = vec![0.0; size];
    let mut w = vec![0.0; size];
    let mut scratch = vec![0.0; size];
    let mut combo = vec![0.0; size];
    let mut u = vec![0.0; size];
    let mut history = Vec::new();
    let mut converged = false;

    for k in 0..maxit {
        let vk = &basis[k * size..(k + 1) * size];
        match precond {
            Some(p) => {
                p(vk, &mut z);
                apply(&z, &mut w);
            }
            None => apply(vk, &mut w),
        }

        let mut h = vec![0.0; k + 2];
        for (i, hi) in h.iter_mut().enumerate().take(k + 1) {
            let vi = &basis[i * size..(i + 1) * size];
            *hi = dot(&w, vi);
            axpy(-*hi, vi, &mut w);
        }
        let hnext = norm2(&w);
        h[k + 1] = hnext;

        for i in 0..k {
            let (a, b) = (h[i], h[i + 1]);
            h[i] = cs[i] * a + sn[i] * b;
            h[i + 1] = -sn[i] * a + cs[i] * b;
        }
        let (c, s) = givens(h[k], h[k + 1]);
        h[k] = c * h[k] + s * h[k + 1];
        h[k + 1] = 0.0;
        cs.push(c);
        sn.push(s);
        let gk = g[k];
        g[k] = c * gk;
        g.push(-s * gk);
        hcols.push(h);

        // current iterate from the (k+1)-dimensional least-squares solution
        let y = back_substitute(&hcols, &g, k + 1);
        combo.iter_mut().for_each(|v| *v = 0.0);
        for (i, yi) in y.iter().enumerate() {
            axpy(*yi, &basis[i * size..(i + 1) * size], &mut combo);
        }
        match precond {
            Some(p) => p(&combo, &mut u),
            None => u.copy_from_slice(&combo),
        }
        apply(&u, &mut scratch);
        let res = scratch.iter().zip(rhs).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt() / beta;
        history.push(res);
        if res < tol {
            converged = true;
            break;
        }
        if hnext <= f64::EPSILON * beta {
            // the Krylov space is invariant; the iterate cannot improve further
            break;
        }
        if basis.len() + size > basis.capacity() {
            basis.reserve(BASIS_CHUNK * size);
        }
        basis.extend(w.iter().map(|v| v / hnext));
    }
    Ok((u, history, converged))
}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else if a == 0.0 {
        (0.0, 1.0)
    } else {
        let r = a.hypot(b);
        (a / r, b / r)
    }
}

/// Solves the leading `k×k` upper triangular system `R y = g`.
fn back_substitute(hcols: &[Vec<f64>], g: &[f64], k: usize) -> Vec<f64> {
    let mut y = g[..k].to_vec();
    for j in (0..k).rev() {
        y[j] /= hcols[j][j];
        let yj = y[j];
        for (i, yi) in y.iter_mut().enumerate().take(j) {
            *yi -= hcols[j][i] * yj;
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precond::ExactPreconditioner;
    use crate::sparse::SparseMatrix;

    fn minimal() -> SaddlePointSystem {
        SaddlePointSystem::assemble(
            SparseMatrix::identity(2),
            SparseMatrix::from_triplets(1, 2, &[(0, 0, 1.0)]).unwrap(),
            SparseMatrix::identity(1),
        )
        .unwrap()
    }

    #[test]
    fn residual_of_exact_and_zero_iterates() {
        let sys = minimal();
        let d = sys.rhs_for_ones();
        assert_eq!(true_residual(&sys, &BlockVector::ones(2, 1, 1), &d).unwrap(), 0.0);
        assert_eq!(true_residual(&sys, &BlockVector::zeros(2, 1, 1), &d).unwrap(), 1.0);
        assert!(true_residual(&sys, &BlockVector::zeros(2, 1, 1), &BlockVector::zeros(2, 1, 1)).is_err());
    }

    #[test]
    fn exact_preconditioner_converges_in_one_step() {
        let sys = minimal();
        let d = sys.rhs_for_ones();
        let pc = ExactPreconditioner::for_system(&sys).unwrap();
        let rep = gmres(&sys, Some(&pc), &d, 1e-10, 10).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
    }

    #[test]
    fn unpreconditioned_solves_minimal_system() {
        let sys = minimal();
        let d = sys.rhs_for_ones();
        let rep = gmres(&sys, None, &d, 1e-12, 10).unwrap();
        assert!(rep.converged && rep.iterations <= 4);
        assert!((rep.solution.norm_inf() - 1.0).abs() < 1e-10);
    }
}
