use super::{axpy, dot, DenseMatrix};
use crate::error::{check_len, Error, Result};

/// `PM = LU` with partial pivoting, stored packed: unit-lower `L` below the
/// diagonal, `U` on and above it.
#[derive(Debug, Clone)]
pub struct LuFactor {
    packed: DenseMatrix,
    perm: Vec<usize>,
}

pub fn lu(m: &DenseMatrix) -> Result<LuFactor> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("lu needs a square matrix".into()));
    }
    let n = m.nrows();
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = a[(k, k)].abs();
        for i in k + 1..n {
            let v = a[(i, k)].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Err(Error::Singular);
        }
        if p != k {
            for j in 0..n {
                let tmp = a[(k, j)];
                a[(k, j)] = a[(p, j)];
                a[(p, j)] = tmp;
            }
            perm.swap(k, p);
        }
        let (head, tail) = a.values_split_at_row(k + 1);
        let pivot_row = &head[k * n..(k + 1) * n];
        let pivot = pivot_row[k];
        for i in 0..n - k - 1 {
            let row = &mut tail[i * n..(i + 1) * n];
            let l = row[k] / pivot;
            row[k] = l;
            if l != 0.0 {
                axpy(-l, &pivot_row[k + 1..], &mut row[k + 1..]);
            }
        }
    }
    Ok(LuFactor { packed: a, perm })
}

/// Solves `Mx = rhs` by partial-pivoting LU.
pub fn lu_solve(m: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    check_len("lu_solve", m.nrows(), rhs.len())?;
    lu(m)?.solve(rhs)
}

impl LuFactor {
    pub fn order(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len("lu solve", self.order(), rhs.len())?;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        self.solve_permuted_in_place(&mut x);
        Ok(x)
    }

    fn solve_permuted_in_place(&self, x: &mut [f64]) {
        let n = self.order();
        for i in 0..n {
            let row = self.packed.row(i);
            x[i] -= dot(&row[..i], &x[..i]);
        }
        for i in (0..n).rev() {
            let row = self.packed.row(i);
            x[i] = (x[i] - dot(&row[i + 1..], &x[i + 1..])) / row[i];
        }
    }

    /// Solves `Mᵀx = rhs` with the same factors.
    pub fn solve_transpose(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len("lu solve_transpose", self.order(), rhs.len())?;
        let n = self.order();
        // Mᵀ = Uᵀ Lᵀ P, so solve Uᵀ y = rhs, Lᵀ w = y, x = Pᵀ w
        let mut y = rhs.to_vec();
        for i in 0..n {
            let row = self.packed.row(i);
            y[i] /= row[i];
            let yi = y[i];
            axpy(-yi, &row[i + 1..], &mut y[i + 1..]);
        }
        for i in (0..n).rev() {
            let row = self.packed.row(i);
            let yi = y[i];
            axpy(-yi, &row[..i], &mut y[..i]);
        }
        let mut x = vec![0.0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_system() {
        let m = DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(lu_solve(&m, &[2.0, 3.0]).unwrap(), vec![3.0, 2.0]);
        assert_eq!(lu_solve(&DenseMatrix::identity(3), &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn singular_detected() {
        let m = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        // the second pivot is exactly zero after elimination
        assert!(matches!(lu(&m), Err(Error::Singular)));
    }

    #[test]
    fn transpose_solve() {
        let m = DenseMatrix::from_rows(&[&[2.0, 1.0, 0.0], &[0.0, 0.5, 3.0], &[4.0, -1.0, 1.0]]).unwrap();
        let f = lu(&m).unwrap();
        let x = f.solve_transpose(&[1.0, 2.0, 3.0]).unwrap();
        let back = m.matvec_transpose(&x).unwrap();
        for (b, e) in back.iter().zip([1.0, 2.0, 3.0]) {
            assert!((b - e).abs() < 1e-13);
        }
    }
}
