use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed decimal numeral {0:?}")]
    Malformed(String),
    #[error("negative value {0} is outside the non-negative domain")]
    Negative(String),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("invalid precision: p = {p}, q = {q} (need p >= 1)")]
    InvalidPrecision { p: u32, q: u32 },
    #[error("value {value} does not fit in {p} integer bits")]
    Overflow { value: String, p: u32 },
    #[error("{0} is not representable on the 2^-{1} grid")]
    NotRepresentable(String, u32),
    #[error("subtraction would be negative: {minuend} - {subtrahend}")]
    NegativeResult { minuend: String, subtrahend: String },
    #[error("precision mismatch: {0} vs {1}")]
    PrecisionMismatch(String, String),
    #[error("{value} lies outside the domain [0, {bound}]")]
    Domain { value: String, bound: String },
    #[error("slope {0} is not supported by the {1} backend")]
    UnsupportedSlope(String, String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("value belongs to a different backend than the map ({0})")]
    BackendMismatch(String),
    #[error("unknown backend {0:?} (expected rational, fixed:p,q, fixed:q, f64 or f32)")]
    UnknownBackend(String),
    #[error("not a cycle: {0}")]
    NotACycle(String),
    #[error("empty input")]
    EmptyInput,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
