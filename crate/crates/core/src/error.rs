use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid noise level {0}: must be finite and non-negative")]
    InvalidLevel(f64),

    #[error("polar conversion is undefined at the origin")]
    PolarOrigin,

    #[error("invalid kernel size {0}: must be odd and >= 1")]
    InvalidKernelSize(i64),

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid sensor model: {0}")]
    InvalidSensorModel(String),

    #[error("{path}: PCD schema mismatch at `{line}`: {reason}")]
    PcdSchema {
        path: PathBuf,
        line: String,
        reason: String,
    },

    #[error("{path}: malformed PCD header line `{line}`")]
    PcdHeader { path: PathBuf, line: String },

    #[error("{path}: unsupported PCD data mode `{line}`")]
    PcdDataMode { path: PathBuf, line: String },

    #[error("{path}: truncated PCD payload: expected {expected} bytes, found {found}")]
    PcdTruncated {
        path: PathBuf,
        expected: usize,
        found: usize,
    },

    #[error("{path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
