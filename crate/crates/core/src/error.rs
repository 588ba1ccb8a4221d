use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failures of the pure scoring layer.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A value fell outside the range an operation accepts.
    Range { what: &'static str, value: f64 },
    /// An input collection or argument violated a precondition.
    Input(String),
    /// Content clarity had no usable trials.
    Clarity(String),
    /// A theme could not be mapped to a category.
    Grouping { theme: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Range { what, value } => write!(f, "{what} out of range: {value}"),
            Error::Input(msg) => write!(f, "invalid input: {msg}"),
            Error::Clarity(msg) => write!(f, "content clarity: {msg}"),
            Error::Grouping { theme } => write!(f, "theme {theme:?} has no category mapping"),
        }
    }
}

impl core::error::Error for Error {}
