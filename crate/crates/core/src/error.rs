use thiserror::Error;

/// Errors raised across the library. Each variant maps onto one CLI exit code
/// via [`Error::exit_code`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("matrix is rank deficient at column {column}")]
    Singular { column: usize },

    #[error("degenerate channel: smallest singular value {0:e} is not usable")]
    DegenerateChannel(f64),

    #[error("effective channel R is not real: max |Im R| = {max_imag:e} exceeds {tol:e}")]
    ComplexR { max_imag: f64, tol: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unsupported dimension: {0}")]
    UnsupportedDimension(String),

    #[error("generator file: {0}")]
    Generator(String),

    #[error("empty candidate set")]
    EmptyCandidates,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// 1 for configuration problems, 2 for everything the validation layer
    /// reports (numerical failures, rejected channels).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Generator(_) | Error::Io(_) | Error::UnsupportedDimension(_) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
