use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of the numerical core.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// A configuration value violates a structural or physical constraint.
    InvalidConfig(String),
    /// Two operands live on different lattices.
    KMaxMismatch { left: usize, right: usize },
    /// A coefficient vector has the wrong length for its basis.
    LengthMismatch { expected: usize, found: usize },
    /// A field violates the constraint a routine relies on (e.g. divergence-free).
    Constraint(String),
    /// A transform grid cannot represent the requested bandwidth.
    GridTooSmall { grid: usize, required: usize },
    /// Index beyond the size of a family or basis.
    IndexOutOfRange { index: usize, len: usize },
    /// A state or drift entry became NaN or infinite.
    NonFinite(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::KMaxMismatch { left, right } => {
                write!(f, "k_max mismatch: {left} vs {right}")
            }
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::Constraint(msg) => write!(f, "constraint violated: {msg}"),
            Error::GridTooSmall { grid, required } => {
                write!(f, "grid of {grid} points per axis is below the required {required}")
            }
            Error::IndexOutOfRange { index, len } => {
                write!(f, "index {index} out of range for length {len}")
            }
            Error::NonFinite(msg) => write!(f, "non-finite value: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
