use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Clifford: conjugated Pauli is {deviation:.3e} away from every signed Pauli")]
    NotClifford { deviation: f64 },

    #[error("noise trajectory has {got} values but the pulse stream needs {expected}")]
    NoiseLengthMismatch { expected: usize, got: usize },

    #[error("sequence must not be empty")]
    EmptySequence,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("rejection sampling gave up after {attempts} attempts with {accepted} of {target} sequences accepted")]
    AttemptCapExceeded {
        attempts: usize,
        accepted: usize,
        target: usize,
    },

    #[error("Gram matrix is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("dataset has no entry for sequence {0}")]
    MissingSequence(String),

    #[error("map is not completely positive (minimum Choi eigenvalue {0:.3e})")]
    NotCompletelyPositive(f64),

    #[error("semidefinite solver failed: {0}")]
    Solver(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
