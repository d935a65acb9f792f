use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("general position violated in arrangement: {0}")]
    GeneralPosition(String),

    #[error("origin not interior")]
    OriginNotInterior,

    #[error("delta out of range: {delta} not in (0, {max})")]
    DeltaOutOfRange { delta: f64, max: f64 },

    #[error("equivariant search failed: best residual {best_residual:e}")]
    EquivariantSearchFailed { best_residual: f64 },

    #[error("no Hopf base component")]
    NoBaseComponent,

    #[error("no diagonal vertex reachable in component {0}")]
    NoDiagonalVertex(usize),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// The innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit status: 1 for invalid input, 2 for pipeline failures, 3 for i/o.
    pub fn exit_code(&self) -> u8 {
        match self.root() {
            Error::Io { .. } => 3,
            Error::Parse(_) | Error::Validation(_) | Error::GeneralPosition(_) | Error::Config(_) => 1,
            _ => 2,
        }
    }
}
