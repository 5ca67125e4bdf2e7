use thiserror::Error;

/// Errors produced by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph construction failed: {0}")]
    ConstructionFailed(String),

    #[error("degenerate spectrum: eigenvalues {i} and {j} are {gap:e} apart")]
    DegenerateSpectrum { i: usize, j: usize, gap: f64 },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("zero eigenvalue: fractional power with order {order} is undefined")]
    ZeroEigenvalue { order: f64 },

    #[error("operator is not invertible (min |d_j| = {min_abs_diag:e})")]
    NotInvertible { min_abs_diag: f64 },

    #[error("transform kind {0} is not supported here")]
    UnsupportedKind(String),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("metric undefined: {0}")]
    UndefinedMetric(String),

    #[error("degenerate chaotic orbit at step {0}")]
    DegenerateOrbit(usize),

    #[error("malformed ciphertext: {0}")]
    MalformedCiphertext(String),

    #[error("invalid key: {0}")]
    InvalidKey(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported format: {0}")]
    Format(String),

    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::ConstructionFailed(_) => "construction-failed",
            Error::DegenerateSpectrum { .. } => "degenerate-spectrum",
            Error::Eigensolver(_) => "eigensolver-failure",
            Error::ZeroEigenvalue { .. } => "zero-eigenvalue",
            Error::NotInvertible { .. } => "not-invertible",
            Error::UnsupportedKind(_) => "unsupported-kind",
            Error::Diverged(_) => "diverged",
            Error::UndefinedMetric(_) => "undefined-metric",
            Error::DegenerateOrbit(_) => "degenerate-orbit",
            Error::MalformedCiphertext(_) => "malformed-ciphertext",
            Error::InvalidKey(_) => "invalid-key",
            Error::Parse { .. } => "parse-error",
            Error::Format(_) => "format-error",
            Error::Io(_) => "io-error",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
