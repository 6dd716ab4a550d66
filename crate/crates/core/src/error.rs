use alloc::string::String;
use core::fmt;

/// Errors raised by the algebra, closure and commutator machinery.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// An algebra or operation table violates its structural invariants.
    InvalidAlgebra(String),
    UnknownSymbol(String),
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },
    VariableOutOfRange {
        index: usize,
        len: usize,
    },
    /// An index argument (coordinate, dimension, element, lattice index) is out of range.
    OutOfBounds(String),
    CarrierMismatch {
        left: usize,
        right: usize,
    },
    /// A closure or enumeration would exceed its configured budget.
    ResourceLimit {
        what: &'static str,
        reached: u64,
        limit: u64,
    },
    NoMalcevTerm,
    NotACongruence(String),
    /// A constructed witness failed its own verification.
    VerificationFailed(String),
    Parse {
        position: usize,
        message: String,
    },
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::ResourceLimit { .. })
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidAlgebra(msg) => write!(f, "invalid algebra: {}", msg),
            Error::UnknownSymbol(s) => write!(f, "unknown operation symbol `{}`", s),
            Error::ArityMismatch {
                symbol,
                expected,
                found,
            } => write!(
                f,
                "operation `{}` has arity {} but was applied to {} arguments",
                symbol, expected, found
            ),
            Error::VariableOutOfRange { index, len } => write!(
                f,
                "variable x{} is out of range for an assignment of length {}",
                index, len
            ),
            Error::OutOfBounds(msg) => write!(f, "index out of bounds: {}", msg),
            Error::CarrierMismatch { left, right } => {
                write!(f, "carrier mismatch: {} vs {} elements", left, right)
            }
            Error::ResourceLimit {
                what,
                reached,
                limit,
            } => write!(
                f,
                "resource limit exceeded for {}: reached {} (limit {})",
                what, reached, limit
            ),
            Error::NoMalcevTerm => write!(f, "the algebra has no verified Mal'cev term"),
            Error::NotACongruence(msg) => write!(f, "not a congruence: {}", msg),
            Error::VerificationFailed(msg) => write!(f, "verification failed: {}", msg),
            Error::Parse { position, message } => {
                write!(f, "parse error at byte {}: {}", position, message)
            }
        }
    }
}

impl core::error::Error for Error {}
