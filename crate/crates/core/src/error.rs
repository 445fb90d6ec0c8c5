use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("circulant embedding is not positive semidefinite: eigenvalue {eigenvalue:e} at index {index} (n = {n})")]
    EmbeddingNotPsd { n: usize, index: usize, eigenvalue: f64 },

    #[error("Hermite degree {0} exceeds the supported maximum of {max}", max = crate::hermite::MAX_DEGREE)]
    RankTooLarge(usize),

    #[error("quadrature did not reach tolerance {tol:e}: {what}")]
    QuadratureFailure { what: String, tol: f64 },

    #[error("no Hermite coefficient above {tol:e} for degrees 1..={q_max}")]
    RankNotFound { q_max: usize, tol: f64 },

    #[error("m * D = {md} is not in the long-memory regime (requires m * D < 1)")]
    RegimeViolation { md: f64 },

    #[error("sample has zero standard deviation")]
    DegenerateSample,

    #[error("sample carries no latent Gaussian path")]
    MissingLatent,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("scenario failed at n = {n}, series {series} (path seed {seed}): {source}")]
    ScenarioFailed {
        n: usize,
        series: usize,
        seed: u64,
        source: Box<Error>,
    },

    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error("refusing to write into non-empty directory {0} (pass --overwrite)")]
    OutputExists(PathBuf),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

/// Validation failure in an experiment config, located by field path.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("config error at `{path}`: {reason}")]
pub struct ConfigError {
    pub path: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            reason: reason.into(),
        }
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::ScenarioFailed { source, .. } => source.exit_code(),
            Error::Io { .. } | Error::Csv { .. } | Error::OutputExists(_) => 4,
            _ => 3,
        }
    }
}
