use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric (asymmetry {asymmetry:.3e}, tolerance {tolerance:.3e})")]
    NotSymmetric { asymmetry: f64, tolerance: f64 },

    #[error("Jacobi iteration did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.6e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("sign violation at pair ({row}, {col}): a={lower:e}, b={upper:e}")]
    SignViolation {
        row: usize,
        col: usize,
        lower: f64,
        upper: f64,
    },

    #[error("connection equation violated on edge ({row}, {col}): relative violation {violation:.3e}")]
    InconsistentConnection {
        row: usize,
        col: usize,
        violation: f64,
    },

    #[error("symmetrizer entry s[{index}] = {value:e} is not positive")]
    NonPositive { index: usize, value: f64 },

    #[error("diagonal vector must be strictly increasing (d[{index}] >= d[{next}])", next = .index + 1)]
    NotSorted { index: usize },

    #[error("eigenbasis is singular")]
    SingularEigenbasis,

    #[error("certified residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    ResidualTooLarge { residual: f64, tolerance: f64 },

    #[error("block shape mismatch: {0}")]
    BlockShapeMismatch(String),

    #[error("matrix is not of full rank: {0}")]
    NotFullRank(String),

    #[error("epsilon {epsilon} coincides with an eigenvalue of P ({eigenvalue})")]
    EpsilonAtEigenvalue { epsilon: f64, eigenvalue: f64 },

    #[error("conditions not met: {0}")]
    ConditionsNotMet(String),

    #[error("vector field vanishes (norm {norm:.3e})")]
    ZeroField { norm: f64 },

    #[error("divergence detected at iteration {iteration} (|X|_F = {norm:e})")]
    DivergenceDetected { iteration: usize, norm: f64 },

    #[error("trajectory has not converged")]
    NotConverged,

    #[error("symmetrization failed: asymmetry {asymmetry:.3e} exceeds {tolerance:.3e}")]
    SymmetrizationFailed { asymmetry: f64, tolerance: f64 },

    #[error("no sign change in bracket ({lo}, {hi})")]
    BracketFailure { lo: f64, hi: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
