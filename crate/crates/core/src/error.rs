use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Failures raised by the numerical routines.
///
/// `Domain` covers violated preconditions (bad orders, out-of-range points,
/// endpoint refusals); `NonFinite` means an intermediate sample was NaN or
/// infinite and the computation was aborted.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    Domain(String),
    NonFinite { context: String, at: f64 },
    Syntax { offset: usize, message: String },
    UnknownIdentifier { offset: usize, name: String },
    Arity { expected: usize, found: usize },
    DerivativeUnavailable(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn non_finite(context: impl Into<String>, at: f64) -> Self {
        Error::NonFinite { context: context.into(), at }
    }

    /// Prefix the diagnostic with a label naming the input that failed.
    pub fn with_label(self, label: &str) -> Self {
        use alloc::format;
        match self {
            Error::Domain(m) => Error::Domain(format!("`{label}`: {m}")),
            Error::NonFinite { context, at } => Error::NonFinite { context: format!("`{label}`: {context}"), at },
            Error::DerivativeUnavailable(m) => Error::DerivativeUnavailable(format!("`{label}`: {m}")),
            other => other,
        }
    }

    /// True for failures caused by a non-finite intermediate value.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonFinite { .. })
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::NonFinite { context, at } => write!(f, "non-finite sample in {context} at {at}"),
            Error::Syntax { offset, message } => write!(f, "syntax error at offset {offset}: {message}"),
            Error::UnknownIdentifier { offset, name } => {
                write!(f, "unknown identifier `{name}` at offset {offset}")
            }
            Error::Arity { expected, found } => {
                write!(f, "arity mismatch: expected a function of {expected} variable(s), found {found}")
            }
            Error::DerivativeUnavailable(m) => write!(f, "derivative unavailable: {m}"),
        }
    }
}

impl core::error::Error for Error {}
