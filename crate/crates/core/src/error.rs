use thiserror::Error;

use crate::fockspace::Mode;

/// Errors raised by the simulator core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("occupation {occupation} of mode {mode} is out of range (cutoff {cutoff})")]
    OccupationOutOfRange {
        mode: Mode,
        occupation: usize,
        cutoff: usize,
    },
    #[error("mode {0} is not part of the layout")]
    UnknownMode(Mode),
    #[error("invalid layout: {0}")]
    InvalidLayout(String),
    #[error("layout mismatch: operator acts on {expected} but state lives on {found}")]
    LayoutMismatch { expected: String, found: String },
    #[error("a two-mode coupling needs two distinct modes, got {0} twice")]
    IdenticalModes(Mode),
    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("partial trace needs at least one subsystem to keep")]
    EmptyKeepSet,
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("unresolvable frequencies: {0}")]
    Unresolvable(String),
    #[error("noise profile line {line}: {message}")]
    Profile { line: usize, message: String },
    #[error("line {line}, column {column}: {message}")]
    Sequence {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
