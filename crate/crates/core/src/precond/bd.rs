use super::{sparse_times_dense, Preconditioner};
use crate::dense::{cholesky, CholeskyFactor};
use crate::error::Result;
use crate::sparse::SparseMatrix;
use crate::system::SaddlePointSystem;

/// Exact block diagonal preconditioner `diag(A, S, CS⁻¹Cᵀ)` with `S = BA⁻¹Bᵀ`.
#[derive(Debug, Clone)]
pub struct BdPreconditioner {
    a_factor: CholeskyFactor,
    s_factor: CholeskyFactor,
    css_factor: CholeskyFactor,
}

impl BdPreconditioner {
    pub fn build(sys: &SaddlePointSystem) -> Result<Self> {
        let a_factor = cholesky(&sys.a().to_dense()).map_err(|e| e.in_block("A"))?;

        let w = a_factor.solve_matrix(&sys.b().transpose().to_dense())?;
        let mut s = sparse_times_dense(sys.b(), &w)?;
        s.symmetrize();
        let s_factor = cholesky(&s).map_err(|e| e.in_block("S"))?;

        let z = s_factor.solve_matrix(&sys.c().transpose().to_dense())?;
        let mut css = sparse_times_dense(sys.c(), &z)?;
        css.symmetrize();
        let css_factor = cholesky(&css).map_err(|e| e.in_block("CS⁻¹Cᵀ"))?;

        Ok(BdPreconditioner {
            a_factor,
            s_factor,
            css_factor,
        })
    }
}

impl Preconditioner for BdPreconditioner {
    fn order(&self) -> usize {
        self.a_factor.order() + self.s_factor.order() + self.css_factor.order()
    }

    fn apply_flat(&self, r: &[f64], out: &mut [f64]) {
        out.copy_from_slice(r);
        let n = self.a_factor.order();
        let m = self.s_factor.order();
        let (x, rest) = out.split_at_mut(n);
        let (y, z) = rest.split_at_mut(m);
        self.a_factor.solve_in_place(x);
        self.s_factor.solve_in_place(y);
        self.css_factor.solve_in_place(z);
    }

    fn apply_transpose_flat(&self, r: &[f64], out: &mut [f64]) {
        self.apply_flat(r, out);
    }

    fn label(&self) -> String {
        "BD".into()
    }
}

/// Direct solver for `𝒜u = r` by block elimination, reusing the Cholesky
/// factors of A, S and CS⁻¹Cᵀ.
///
/// From `Ax + Bᵀy = f`, `−Bx − Cᵀz = g`, `Cy = h`:
/// `(CS⁻¹Cᵀ)z = h − CS⁻¹(g + BA⁻¹f)`, then `Sy = g + BA⁻¹f + Cᵀz` and
/// `Ax = f − Bᵀy`. The transpose flips the signs of B and C, which leaves
/// every Schur complement unchanged.
#[derive(Debug, Clone)]
pub struct BlockEliminationSolver {
    bd: BdPreconditioner,
    b: SparseMatrix,
    c: SparseMatrix,
}

impl BlockEliminationSolver {
    pub fn build(sys: &SaddlePointSystem) -> Result<Self> {
        Ok(BlockEliminationSolver {
            bd: BdPreconditioner::build(sys)?,
            b: sys.b().clone(),
            c: sys.c().clone(),
        })
    }

    fn solve(&self, r: &[f64], out: &mut [f64], sign: f64) {
        let n = self.bd.a_factor.order();
        let m = self.bd.s_factor.order();
        let (f, rest) = r.split_at(n);
        let (g, h) = rest.split_at(m);

        let mut af = f.to_vec();
        self.bd.a_factor.solve_in_place(&mut af);
        // t = g + sign·BA⁻¹f
        let mut t = self.b.matvec(&af).expect("shape checked at build");
        t.iter_mut().zip(g).for_each(|(ti, gi)| *ti = gi + sign * *ti);
        let mut st = t.clone();
        self.bd.s_factor.solve_in_place(&mut st);
        let cst = self.c.matvec(&st).expect("shape checked at build");
        let mut z: Vec<f64> = h.iter().zip(&cst).map(|(hi, ci)| sign * hi - ci).collect();
        self.bd.css_factor.solve_in_place(&mut z);

        let ctz = self.c.matvec_transpose(&z).expect("shape checked at build");
        let mut y: Vec<f64> = t.iter().zip(&ctz).map(|(ti, ci)| ti + ci).collect();
        self.bd.s_factor.solve_in_place(&mut y);
        z.iter_mut().for_each(|v| *v *= sign);

        let bty = self.b.matvec_transpose(&y).expect("shape checked at build");
        let (ox, rest) = out.split_at_mut(n);
        let (oy, oz) = rest.split_at_mut(m);
        for ((o, fi), bi) in ox.iter_mut().zip(f).zip(&bty) {
            *o = fi - sign * bi;
        }
        self.bd.a_factor.solve_in_place(ox);
        oy.copy_from_slice(&y);
        oz.copy_from_slice(&z);
    }
}

impl Preconditioner for BlockEliminationSolver {
    fn order(&self) -> usize {
        self.bd.order()
    }

    fn apply_flat(&self, r: &[f64], out: &mut [f64]) {
        self.solve(r, out, 1.0);
    }

    fn apply_transpose_flat(&self, r: &[f64], out: &mut [f64]) {
        self.solve(r, out, -1.0);
    }

    fn label(&self) -> String {
        "block-elimination".into()
    }
}
