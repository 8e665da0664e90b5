use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("instance needs at least 2 variables, got {0}")]
    TooFewVariables(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("exact oracle unavailable for n = {n} (enumeration limit is {limit})")]
    OracleUnavailable { n: usize, limit: usize },

    #[error("minimum energy must be negative to normalise a ratio, got {0}")]
    NonNegativeMinimum(i64),

    #[error("qubits {a} and {b} are not adjacent on the chain")]
    NotAdjacent { a: usize, b: usize },

    #[error("qubit {qubit} out of range for {n} qubits")]
    QubitOutOfRange { qubit: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("trial {trial_index} failed: {message}")]
    TrialFailed { trial_index: usize, message: String },

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
