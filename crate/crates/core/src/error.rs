use thiserror::Error;

#[derive(Debug, Error)]
pub enum StokesError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("index {index} out of range for {len} unknowns")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("boundary value given for non-Dirichlet face (axis {axis}, face {face})")]
    BoundaryValueOnNonDirichletFace { axis: usize, face: usize },

    #[error("zero distributive diagonal at unknown {0}")]
    ZeroDistributiveDiagonal(usize),

    #[error("singular matrix: zero pivot in column {0}")]
    SingularMatrix(usize),

    #[error("dense size {n} exceeds cap {cap}{hint}")]
    DenseCapExceeded { n: usize, cap: usize, hint: &'static str },

    #[error("invalid hierarchy: {0}")]
    InvalidHierarchy(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, StokesError>;
