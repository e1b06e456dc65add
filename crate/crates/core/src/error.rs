use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (max deviation {deviation:.3e} exceeds {tolerance:.1e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),

    #[error("invalid dimension {0} (need d >= 2)")]
    InvalidDimension(usize),

    #[error("Bloch vector of length {0} lies outside the unit ball")]
    BlochOutOfBall(f64),

    #[error("channel is not trace preserving (completeness residual {0:.3e})")]
    NotTracePreserving(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPsd(f64),

    #[error("parameter `{name}` = {value} out of range ({expected})")]
    ParameterOutOfRange {
        name: String,
        value: f64,
        expected: String,
    },

    #[error("not a POVM: {0}")]
    NotPovm(String),

    #[error("channel is not certified incoherent: {0}")]
    NotIncoherentChannel(String),

    #[error("input state has no coherence; probe state undefined")]
    IncoherentInput,

    #[error("Φ(I/d) is not diagonal (off-diagonal residual {0:.3e})")]
    HypothesisViolated(f64),

    #[error("inconsistent classification verdicts: {0}")]
    InconsistentVerdicts(String),

    #[error("bad value for key `{key}`: {message}")]
    Format { key: String, message: String },

    #[error("JSON parse error at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn out_of_range(name: &str, value: f64, expected: &str) -> Self {
        Error::ParameterOutOfRange {
            name: name.to_string(),
            value,
            expected: expected.to_string(),
        }
    }

    pub(crate) fn format(key: &str, message: impl Into<String>) -> Self {
        Error::Format {
            key: key.to_string(),
            message: message.into(),
        }
    }

    /// True for errors caused by malformed or out-of-range user input rather
    /// than by a domain condition of a well-formed object.
    pub fn is_usage_error(&self) -> bool {
        matches!(
            self,
            Error::Format { .. }
                | Error::Json { .. }
                | Error::ParameterOutOfRange { .. }
                | Error::InvalidDimension(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
