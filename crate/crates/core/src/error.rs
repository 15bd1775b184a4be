use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("inconsistent framing: {0}")]
    InconsistentFraming(String),

    #[error("{0} did not converge within {iters} iterations", iters = .1)]
    NonConvergence(String, usize, Vec<f64>),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("template error: {0}")]
    Template(String),

    #[error("duplicate record id `{0}`")]
    DuplicateRecord(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("adapter error: {0}")]
    Adapter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("I/O error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// True for errors caused by user input rather than the run itself.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation { .. } | Error::Parse(_) | Error::InconsistentFraming(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
