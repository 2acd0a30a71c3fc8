use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("packet framing: expected {expected} bits, got {actual}")]
    Framing { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("insufficient data: need {needed} samples, have {available}")]
    InsufficientData { needed: usize, available: usize },

    #[error("invalid data: {0}")]
    Data(String),

    /// Sync found no correlation peak that stands out from noise.
    #[error("no signal detected (peak correlation {peak:.4}, confidence {confidence:.3})")]
    NoSignal { peak: f64, confidence: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: bad spectrogram format: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{path}: corrupt payload: expected {expected} bytes, found {actual}")]
    Corrupt {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
