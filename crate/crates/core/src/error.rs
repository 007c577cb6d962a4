use thiserror::Error;

/// Errors raised by the QCA/VQE library.
#[derive(Debug, Error)]
pub enum QcaError {
    #[error("layout error: {0}")]
    Layout(String),

    #[error("unknown layout `{0}`")]
    UnknownLayout(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: usize, n_qubits: usize },

    #[error("unsupported Hamiltonian: {0}")]
    UnsupportedHamiltonian(String),

    #[error("system too large: {n_qubits} qubits exceeds limit of {limit}")]
    TooLarge { n_qubits: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, QcaError>;
