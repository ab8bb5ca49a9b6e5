use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broad failure class, used by the command line to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad configuration, malformed input files, unmet preconditions.
    Config,
    /// A numerical premise failed (instability, singular matrices, ...).
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("improper transfer function: numerator degree {num} exceeds denominator degree {den}")]
    Improper { num: usize, den: usize },

    #[error("unstable {what}: roots {roots}")]
    Unstable { what: String, roots: String },

    #[error("closed-loop stability assumption violated ({setting}): closed-loop roots {roots}")]
    ClosedLoopUnstable { setting: String, roots: String },

    #[error("model closed-loop stability assumption violated for the instrument prefilter: roots {roots}")]
    ModelClosedLoopUnstable { roots: String },

    #[error("modified normal matrix is numerically singular (condition number {condition:.3e})")]
    SingularNormalMatrix { condition: f64 },

    #[error("least-squares normal matrix is rank deficient (condition number {condition:.3e})")]
    RankDeficient { condition: f64 },

    #[error("algebraic loop is not solvable: {0}")]
    AlgebraicLoop(String),

    #[error("missing data: {0}")]
    MissingData(String),

    #[error("misaligned sampling grids: {0}")]
    Misaligned(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.to_string(),
        }
    }

    /// Strips any iteration wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtIteration { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self.root() {
            Error::InvalidInput(_)
            | Error::Improper { .. }
            | Error::MissingData(_)
            | Error::Misaligned(_)
            | Error::Unsupported(_)
            | Error::Config(_)
            | Error::Io { .. }
            | Error::Parse { .. } => ErrorClass::Config,
            _ => ErrorClass::Numerical,
        }
    }

    /// Short machine-parsable identifier.
    pub fn code(&self) -> &'static str {
        match self.root() {
            Error::InvalidInput(_) => "invalid-input",
            Error::Improper { .. } => "improper",
            Error::Unstable { .. } => "unstable",
            Error::ClosedLoopUnstable { .. } => "closed-loop-unstable",
            Error::ModelClosedLoopUnstable { .. } => "model-closed-loop-unstable",
            Error::SingularNormalMatrix { .. } => "singular-normal-matrix",
            Error::RankDeficient { .. } => "rank-deficient",
            Error::AlgebraicLoop(_) => "algebraic-loop",
            Error::MissingData(_) => "missing-data",
            Error::Misaligned(_) => "misaligned",
            Error::Unsupported(_) => "unsupported",
            Error::Config(_) => "config",
            Error::Io { .. } => "io",
            Error::Parse { .. } => "parse",
            Error::AtIteration { .. } => unreachable!(),
        }
    }
}

pub(crate) fn fmt_roots<T: std::fmt::Display>(roots: &[num_complex::Complex<T>]) -> String {
    let parts: Vec<String> = roots.iter().map(|r| format!("{}{:+}i", r.re, r.im)).collect();
    format!("[{}]", parts.join(", "))
}
