use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("FCIDUMP line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("invalid integrals: {0}")]
    InvalidIntegrals(String),

    #[error("operator is not hermitian (max imaginary coefficient {0:e})")]
    NotHermitian(f64),

    #[error("infeasible spin state: {0}")]
    Infeasible(String),

    #[error("unsupported ansatz configuration: {0}")]
    Ansatz(String),

    #[error("non-finite energy at step {step}")]
    NonFinite {
        step: usize,
        /// Energies recorded up to the failure, one `E_avg` per step.
        trace: Vec<f64>,
    },

    #[error("oracle: {0}")]
    Oracle(String),

    #[error("numerical check failed: {0}")]
    Numerical(String),

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
