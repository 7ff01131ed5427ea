//! Shift-splitting preconditioners for three-by-three block saddle point systems.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod dense;
pub mod error;
pub mod experiments;
pub mod io;
pub mod krylov;
pub mod params;
pub mod precond;
pub mod problems;
pub mod sparse;
pub mod spectral;
pub mod stationary;
pub mod system;

pub use dense::{ComplexSpectrum, DenseMatrix};
pub use error::{Error, Result};
pub use krylov::{gmres, SolveReport};
pub use params::{estimate_params, ParamEstimate};
pub use precond::{BdPreconditioner, GssConfig, GssKind, GssPreconditioner, GssSpec, Preconditioner};
pub use problems::{example1, example1_with, Case, Example1Scaling, NoiseSpec};
pub use sparse::SparseMatrix;
pub use system::{BlockVector, SaddlePointSystem};
