use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |H - H^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Pfaffian requires an even dimension, got {0}")]
    OddDimension(usize),

    #[error("site index {index} out of range for {len} sites")]
    SiteOutOfRange { index: usize, len: usize },

    #[error("invalid site selection: {0}")]
    InvalidSites(String),

    #[error("Schatten norm requires p >= 1, got {0}")]
    InvalidNormOrder(f64),

    #[error("marginals are inconsistent under partial trace (deviation {deviation:e} on subset {subset:?})")]
    InconsistentMarginals { subset: Vec<usize>, deviation: f64 },

    #[error("missing marginal for subset {0:?}")]
    MissingMarginal(Vec<usize>),

    #[error("density matrix is not positive semidefinite (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("density matrix trace is {trace}, expected 1")]
    BadTrace { trace: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Hilbert space dimension {dimension} exceeds the budget of {budget}")]
    DimensionBudget { dimension: usize, budget: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("four-tangle filter {0} has not been transcribed")]
    NotTranscribed(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
