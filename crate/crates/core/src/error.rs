use crate::data::DataError;
use crate::detector::DetectError;
use crate::netcore::NetError;
use thiserror::Error;

/// Any failure of the higher-level workflows (training, inference, watch).
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> Self {
        let context = context.into();
        move |source| Error::Io { context, source }
    }
}
