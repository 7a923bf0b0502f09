use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |m - m†| = {residual:.3e} exceeds {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {offnorm:.3e})")]
    NoConvergence { sweeps: usize, offnorm: f64 },
    #[error("matrix function undefined at eigenvalue {eigenvalue}")]
    DomainError { eigenvalue: f64 },
    #[error("result dimension {entries} entries exceeds cap {cap}")]
    SizeOverflow { entries: u128, cap: u128 },
    #[error("not a valid density matrix: {reason}")]
    NotDensityMatrix { reason: String },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: String, right: String },
    #[error("sequence is empty")]
    EmptySequence,
    #[error("exact enumeration of {required} sequences exceeds cap {cap}")]
    ExactCapExceeded { required: u128, cap: u128 },
    #[error("letter {letter} has zero probability; Shannon lengths undefined")]
    ZeroProbabilityLetter { letter: usize },
    #[error("Kraft inequality violated: sum 2^-l = {sum}")]
    KraftViolated { sum: f64 },
    #[error("no sequence satisfies the length condition (window too narrow for N = {n})")]
    EmptyProjector { n: usize },
    #[error("true state places mass {mass:.3e} outside the believed state's support")]
    SupportMismatch { mass: f64 },
    #[error("invalid distribution: {reason}")]
    InvalidDistribution { reason: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
