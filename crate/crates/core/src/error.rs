use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("index ({row}, {col}) out of range for a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },

    #[error("index space overflow: {0}")]
    Overflow(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not symmetric (relative asymmetry {0:.3e})")]
    Asymmetric(f64),

    #[error("matrix is not positive definite (pivot {pivot} = {value:.3e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("factorization of block {block} failed: {source}")]
    BlockFactorization {
        block: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("matrix is singular")]
    Singular,

    #[error("no convergence after {0} iterations")]
    ConvergenceFailure(usize),

    #[error("order {size} exceeds the dense size guard {limit}")]
    SizeGuard { size: usize, limit: usize },

    #[error("bound not applicable: {0}")]
    InapplicableBound(String),

    #[error("iteration diverged at step {iteration} (RES = {res:.3e})")]
    Diverged { iteration: usize, res: f64 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn in_block(self, block: &'static str) -> Error {
        Error::BlockFactorization {
            block,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { context, expected, found })
    }
}
