use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid size: {0}")]
    InvalidSize(&'static str),

    #[error("invalid sparse structure: {0}")]
    InvalidStructure(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("matrix market line {line}: {message}")]
    MatrixMarket { line: usize, message: String },

    #[error("vector file line {line}: {message}")]
    VectorFile { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("matrix is not symmetric")]
    NotSymmetric,

    #[error("{context}: matrix is not positive definite (eigenvalue or pivot {value:e})")]
    NotPositiveDefinite { context: &'static str, value: f64 },

    #[error("{0}: matrix is singular to working precision")]
    Singular(&'static str),

    #[error("{routine} did not converge in {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("conjugate gradient detected an indefinite operator (p'Mp = {curvature:e})")]
    Indefinite { curvature: f64 },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("reference vector has zero norm")]
    ZeroReference,

    #[error("dimension {n} exceeds the dense size guard {limit}")]
    DenseGuard { n: usize, limit: usize },

    #[error("candidate grid is empty")]
    EmptyGrid,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Error {
        match self {
            e @ Error::Step { .. } => e,
            e => Error::Step {
                step,
                source: Box::new(e),
            },
        }
    }
}
