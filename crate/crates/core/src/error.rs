use std::path::PathBuf;

use thiserror::Error;

use crate::krylov::SolveReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: {0}")]
    Shape(String),

    #[error("singular diagonal at flat index {index}")]
    SingularDiagonal { index: usize },

    #[error("right-hand side has zero norm")]
    DegenerateRhs,

    #[error("zero pivot in vertical factorisation of column (i={i}, j={j}) at level {k}")]
    FactorBreakdown { i: usize, j: usize, k: usize },

    #[error("non-finite value produced by the preconditioner")]
    PreconditionerOverflow,

    #[error("solve failed at iteration {}: {kind}", report.iterations)]
    Solve { kind: SolveFailure, report: Box<SolveReport> },

    #[error("malformed data in {path}:{line}: {msg}")]
    Data { path: PathBuf, line: usize, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Why a solve was aborted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveFailure {
    /// A field or scalar became non-finite.
    Overflow,
    /// A breakdown was flagged again straight after a restart at the same iterate.
    ConsecutiveBreakdown,
}

impl std::fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveFailure::Overflow => f.write_str("overflow"),
            SolveFailure::ConsecutiveBreakdown => f.write_str("consecutive breakdown"),
        }
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
