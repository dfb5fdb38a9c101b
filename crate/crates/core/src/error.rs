use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CampError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CampError {
    #[error("foot target {target:?} is out of leg reach (planar distance {distance:.6} m, reach [{min_reach:.6}, {max_reach:.6}] m)")]
    Unreachable {
        target: [f64; 3],
        distance: f64,
        min_reach: f64,
        max_reach: f64,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("environment {index}: {source}")]
    Env {
        index: usize,
        #[source]
        source: Box<CampError>,
    },

    #[error("missing run directory {0}")]
    MissingRun(PathBuf),

    #[error("refusing to overwrite existing output {0} (use --force)")]
    OutputExists(PathBuf),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CampError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CampError::Io {
            path: path.into(),
            source,
        }
    }

    /// Broad class used by the CLI to choose an exit code.
    pub fn kind(&self) -> ErrorKind {
        match self {
            CampError::Config(_) | CampError::InvalidArgument(_) | CampError::OutputExists(_) => {
                ErrorKind::Config
            }
            CampError::NonFinite(_) => ErrorKind::Numeric,
            CampError::Env { source, .. } => source.kind(),
            _ => ErrorKind::Data,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
}

pub(crate) fn ensure_finite(values: &[f64], context: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CampError::NonFinite(context.to_string()))
    }
}
