use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Arguments outside an operation's domain.
    InvalidInput(String),
    /// A quadrature, linear solve or iteration did not reach tolerance.
    NumericalFailure(String),
    /// Parameters not covered by any of the limit theorems.
    UnsupportedRegime(String),
    /// An operation needs data that has not been computed yet.
    Precondition(String),
    /// The time stepper increased the weighted norm.
    Instability(String),
    /// Grid or profile resolution is too coarse for the requested accuracy.
    Resolution(String),
    /// The collision kernel has no usable rejection envelope.
    Unsamplable(String),
    /// Too few samples for a stable statistic.
    Statistics(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(m) => write!(f, "invalid input: {m}"),
            Error::NumericalFailure(m) => write!(f, "numerical failure: {m}"),
            Error::UnsupportedRegime(m) => write!(f, "unsupported regime: {m}"),
            Error::Precondition(m) => write!(f, "precondition failed: {m}"),
            Error::Instability(m) => write!(f, "instability: {m}"),
            Error::Resolution(m) => write!(f, "insufficient resolution: {m}"),
            Error::Unsamplable(m) => write!(f, "kernel not samplable: {m}"),
            Error::Statistics(m) => write!(f, "statistics error: {m}"),
        }
    }
}

impl core::error::Error for Error {}

macro_rules! bail {
    ($variant:ident, $($arg:tt)*) => {
        return Err($crate::Error::$variant(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
