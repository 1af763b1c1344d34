use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation over `[s, t]` was asked for with `s > t` (or `s >= t`
    /// where a nondegenerate interval is required).
    #[error("invalid interval [{s}, {t}]")]
    InvalidInterval { s: f64, t: f64 },

    /// Input data violated a documented precondition.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A correction integral of order `l` was requested from a commutator
    /// field of order `p < l` (or `l = 0`).
    #[error("correction order l={l} out of range for commutator order p={p}")]
    OrderOutOfRange { l: usize, p: usize },

    /// `nilpotent_exp` was handed a matrix that is not strictly upper
    /// triangular.
    #[error("matrix is not strictly upper triangular (max lower/diagonal magnitude {0:.3e})")]
    NotNilpotent(f64),

    /// A p-fold commutator that the model requires to be central failed the
    /// centrality check.
    #[error("commutator payload is not central: residual {0:.3e}")]
    NonCentral(f64),

    /// Two mode vectors of different lengths were combined.
    #[error("mode dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    /// A truncated-Fock computation carried too much mass in its top number
    /// sector for the result to be trusted.
    #[error("fock cutoff leakage {leak:.3e} exceeds {limit:.3e}; result inconclusive")]
    CutoffLeakage { leak: f64, limit: f64 },

    /// The requested check needs exact operator arithmetic the backend does
    /// not expose.
    #[error("unsupported backend for this operation: {0}")]
    UnsupportedBackend(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
