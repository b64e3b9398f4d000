use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("bit chain width mismatch: {left} vs {right}")]
    WidthMismatch { left: u32, right: u32 },

    #[error("invalid bit chain: {0}")]
    InvalidChain(String),

    #[error("register of {requested} qubits exceeds the capacity of {max}")]
    Capacity { requested: u32, max: u32 },

    #[error("qubit index {index} out of range 1..={n_qubits}")]
    QubitOutOfRange { index: usize, n_qubits: u32 },

    #[error("invalid qubit selection: {0}")]
    InvalidQubits(String),

    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: u32, right: u32 },

    #[error("state is not normalized: squared norm {norm_sqr}")]
    Unnormalized { norm_sqr: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("no measurement outcome carries probability mass")]
    ZeroProbability,

    #[error("parse error: {0}")]
    Parse(String),
}
