use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}:{line}:{column}: {message}")]
    Annotation {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("not a binary PPM: expected magic P6, found {0:?}")]
    PpmMagic(String),
    #[error("unsupported PPM maxval {0}; only 255 is accepted")]
    PpmMaxval(u32),
    #[error("malformed PPM header: {0}")]
    PpmHeader(String),
    #[error("truncated PPM pixel data: expected {expected} bytes, found {found}")]
    PpmTruncated { expected: usize, found: usize },
    #[error("{path}: {message}")]
    Dataset { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DataError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| DataError::Io { path, source }
    }

    pub(crate) fn dataset(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        DataError::Dataset {
            path: path.into(),
            message: message.into(),
        }
    }
}
