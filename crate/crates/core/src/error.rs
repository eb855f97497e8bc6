use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid design: {}", .0.join("; "))]
    Validation(Vec<String>),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("dispersionless channel: {0} is undefined for beta2 = 0")]
    Dispersionless(&'static str),

    #[error("nonphysical coupling: {0}")]
    Coupling(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("numerical convergence failure: {0}")]
    Convergence(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unknown material `{0}`")]
    UnknownMaterial(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Validation(vec![msg.into()])
    }

    /// Process exit code for the CLI: 2 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Convergence(_) | Error::Grid(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
