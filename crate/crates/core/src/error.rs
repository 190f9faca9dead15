use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    Model(String),

    #[error("zero-sequence network singular: no grounded source and no shunt capacitance")]
    ZeroSequenceSingular,

    #[error("invalid fault: {0}")]
    Fault(String),

    #[error("signal processing: {0}")]
    Signal(String),

    #[error("locus point undefined: compensated current {magnitude:.3e} A is below the {floor:.3e} A floor")]
    BelowCurrentFloor { magnitude: f64, floor: f64 },

    #[error("image: {0}")]
    Image(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    Dimension { expected: usize, actual: usize },

    #[error("training: {0}")]
    Training(String),

    #[error("normalization: {0}")]
    Normalization(String),

    #[error("svr solver did not converge after {iterations} iterations (KKT gap {gap:.3e})")]
    SvrNonConvergence { iterations: usize, gap: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("scenario {scenario}: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
