use thiserror::Error;

/// Errors raised by the simulator and its analysis layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix entries length {len} does not match {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NonHermitian(f64),

    #[error("gate is not unitary (max deviation {0:e})")]
    NonUnitary(f64),

    #[error("qubit index {index} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { index: usize, n_qubits: usize },

    #[error("qubit {0} appears more than once")]
    RepeatedQubit(usize),

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("{name} = {value} is outside [0, 1]")]
    OutOfUnitInterval { name: &'static str, value: f64 },

    #[error("{name} must be non-negative, got {value}")]
    Negative { name: &'static str, value: f64 },

    #[error("matrix has a significantly negative eigenvalue {0:e}")]
    NegativeEigenvalue(f64),

    #[error("post-selected branch has probability {0:e}")]
    ZeroProbability(f64),

    #[error("no sign change on [{lo}, {hi}] (f(lo) = {f_lo:e}, f(hi) = {f_hi:e})")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("closed form {form}: {detail}")]
    TranscriptionFault { form: &'static str, detail: String },

    #[error("unknown metric '{0}'")]
    UnknownMetric(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
