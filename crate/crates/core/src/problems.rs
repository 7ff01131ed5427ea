//! Test problem generators, Λ presets and the noise perturbation.

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::io::read_matrix_market;
use crate::precond::{GssSpec, SpdOperator};
use crate::sparse::SparseMatrix;
use crate::system::SaddlePointSystem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

/// Scaling of the one-dimensional Laplacian `G` in [`example1`].
///
/// `Normalized` uses `G = tridiag(−1, 2, −1)/(l+1)²`. `Unscaled` drops the
/// factor. The unscaled form reproduces the published unpreconditioned
/// iteration count and `κ(𝒜)`; the normalized form reproduces the published
/// spectral bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Example1Scaling {
    #[default]
    Normalized,
    Unscaled,
}

impl fmt::Display for Example1Scaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Example1Scaling::Normalized => "normalized",
            Example1Scaling::Unscaled => "unscaled",
        })
    }
}

impl FromStr for Example1Scaling {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "normalized" => Ok(Example1Scaling::Normalized),
            "unscaled" => Ok(Example1Scaling::Unscaled),
            other => Err(Error::InvalidArgument(format!("unknown scaling `{other}`"))),
        }
    }
}

pub fn example1(l: usize) -> Result<SaddlePointSystem> {
    example1_with(l, Example1Scaling::Normalized)
}

/// The test family of order `4l²`:
///
/// ```text
/// A = diag(I⊗G + G⊗I, I⊗G + G⊗I),  B = [I⊗F, F⊗I],  C = E⊗F
/// F = tridiag(0, 1, −1)/(l+1),  E = diag(1, l+1, …, l²−l+1)
/// ```
pub fn example1_with(l: usize, scaling: Example1Scaling) -> Result<SaddlePointSystem> {
    if l < 2 {
        return Err(Error::InvalidArgument(format!("example1 needs l >= 2, got {l}")));
    }
    let h = 1.0 / (l + 1) as f64;
    let g = SparseMatrix::tridiag(l, -1.0, 2.0, -1.0)?;
    let g = match scaling {
        Example1Scaling::Normalized => g.scale(h * h),
        Example1Scaling::Unscaled => g,
    };
    let f = SparseMatrix::tridiag(l, 0.0, 1.0, -1.0)?.scale(h);
    let e = SparseMatrix::from_diagonal(&(0..l).map(|k| (1 + k * l) as f64).collect::<Vec<_>>());
    let id = SparseMatrix::identity(l);

    let t = id.kron(&g)?.add_scaled(1.0, &g.kron(&id)?, 1.0)?;
    let nt = l * l;
    let mut a_entries = Vec::with_capacity(2 * t.nnz());
    let mut b_entries = Vec::new();
    for (i, j, v) in t.triplets() {
        a_entries.push((i, j, v));
        a_entries.push((i + nt, j + nt, v));
    }
    for (i, j, v) in id.kron(&f)?.triplets() {
        b_entries.push((i, j, v));
    }
    for (i, j, v) in f.kron(&id)?.triplets() {
        b_entries.push((i, j + nt, v));
    }
    let a = SparseMatrix::from_triplets(2 * nt, 2 * nt, &a_entries)?;
    let b = SparseMatrix::from_triplets(nt, 2 * nt, &b_entries)?;
    let c = e.kron(&f)?;
    SaddlePointSystem::assemble(a, b, c)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Case {
    I,
    II,
}

impl FromStr for Case {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Case::I),
            "II" | "2" => Ok(Case::II),
            other => Err(Error::InvalidArgument(format!("unknown case `{other}`"))),
        }
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Case::I => "I",
            Case::II => "II",
        })
    }
}

/// The coefficient on Λ3 used by the standard presets.
pub const DEFAULT_LAMBDA3_COEF: f64 = 1e-3;

/// A `(Λ1, Λ2, Λ3)` triple without the shift.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaTriple {
    pub lambda1: SpdOperator,
    pub lambda2: SpdOperator,
    pub lambda3: SpdOperator,
}

impl LambdaTriple {
    pub fn pess(&self, s: f64) -> GssSpec {
        GssSpec::Pess {
            lambda1: self.lambda1.clone(),
            lambda2: self.lambda2.clone(),
            lambda3: self.lambda3.clone(),
            s,
        }
    }

    /// LPESS ignores Λ1.
    pub fn lpess(&self, s: f64) -> GssSpec {
        GssSpec::Lpess {
            lambda2: self.lambda2.clone(),
            lambda3: self.lambda3.clone(),
            s,
        }
    }
}

/// `CCᵀ`
pub fn c_ct(sys: &SaddlePointSystem) -> Result<SparseMatrix> {
    sys.c().spmm(&sys.c().transpose())
}

/// Case I is `(I, I, k·I)` and Case II is `(A, I, k·CCᵀ)`.
pub fn case_preset(case: Case, sys: &SaddlePointSystem, lambda3_coef: f64) -> Result<LambdaTriple> {
    let (n, m, p) = sys.dims();
    Ok(match case {
        Case::I => LambdaTriple {
            lambda1: SpdOperator::scaled_identity(n, 1.0),
            lambda2: SpdOperator::scaled_identity(m, 1.0),
            lambda3: SpdOperator::scaled_identity(p, lambda3_coef),
        },
        Case::II => LambdaTriple {
            lambda1: SpdOperator::Matrix(sys.a().clone()),
            lambda2: SpdOperator::scaled_identity(m, 1.0),
            lambda3: SpdOperator::Matrix(c_ct(sys)?.scale(lambda3_coef)),
        },
    })
}

/// Noise `ΔX = scale · N_P · std(X) · randn` added to B and C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    /// `N_P`, in percent.
    pub percentage: f64,
    pub scale: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(percentage: f64, seed: u64) -> Self {
        NoiseSpec {
            percentage,
            scale: 1e-4,
            seed,
        }
    }
}

/// Population standard deviation over every entry of the densified matrix.
pub fn population_std(m: &SparseMatrix) -> f64 {
    let count = (m.nrows() * m.ncols()) as f64;
    if count == 0.0 {
        return 0.0;
    }
    let mean = m.values().iter().sum::<f64>() / count;
    let dense_sq = m.values().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    let zeros = count - m.nnz() as f64;
    ((dense_sq + zeros * mean * mean) / count).sqrt()
}

fn add_noise(m: &SparseMatrix, amplitude: f64, rng: &mut ChaCha20Rng) -> Result<SparseMatrix> {
    let mut d: DenseMatrix = m.to_dense();
    for i in 0..d.nrows() {
        for v in d.row_mut(i) {
            let z: f64 = rng.sample(StandardNormal);
            *v += amplitude * z;
        }
    }
    Ok(SparseMatrix::from_dense(&d))
}

/// Perturbs B and C with seeded Gaussian noise; A is left untouched.
///
/// Draws come from ChaCha20 seeded with `seed`, first for B in row-major
/// order and then for C.
pub fn perturb(sys: &SaddlePointSystem, noise: &NoiseSpec) -> Result<SaddlePointSystem> {
    if !(noise.percentage >= 0.0) {
        return Err(Error::InvalidArgument("noise percentage must be nonnegative".into()));
    }
    if noise.percentage == 0.0 {
        return Ok(sys.clone());
    }
    let mut rng = ChaCha20Rng::seed_from_u64(noise.seed);
    let k = noise.scale * noise.percentage;
    let b = add_noise(sys.b(), k * population_std(sys.b()), &mut rng)?;
    let c = add_noise(sys.c(), k * population_std(sys.c()), &mut rng)?;
    SaddlePointSystem::assemble(sys.a().clone(), b, c)
}

/// Shift added to A by `load_external` when requested.
pub const EXTERNAL_SHIFT: f64 = 1e-3;

/// Reads A, B and C from Matrix Market files. With `shift`, A becomes
/// `A + 0.001·I` to force positive definiteness.
pub fn load_external(a: impl AsRef<Path>, b: impl AsRef<Path>, c: impl AsRef<Path>, shift: bool) -> Result<SaddlePointSystem> {
    let mut am = read_matrix_market(a)?;
    if shift {
        if am.nrows() != am.ncols() {
            return Err(Error::DimensionMismatch {
                context: "A must be square",
                expected: am.nrows(),
                found: am.ncols(),
            });
        }
        am = am.add_scaled(1.0, &SparseMatrix::identity(am.nrows()), EXTERNAL_SHIFT)?;
    }
    SaddlePointSystem::assemble(am, read_matrix_market(b)?, read_matrix_market(c)?)
}
