use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NetError {
    #[error("invalid tensor shape {0:?}")]
    InvalidShape(Vec<usize>),
    #[error("shape {shape:?} needs {} elements, got {len}", shape.iter().product::<usize>())]
    DataLength { shape: Vec<usize>, len: usize },
    #[error("expected a rank-{expected} tensor, got shape {got:?}")]
    RankMismatch { expected: usize, got: Vec<usize> },
    #[error("{what}: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        what: &'static str,
        expected: Vec<usize>,
        got: Vec<usize>,
    },
    #[error("{layer}: input {dim} is {got}, layer expects {expected}")]
    DimMismatch {
        layer: String,
        dim: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{layer}: spatial size {size} too small for kernel {kernel} with padding {pad}")]
    SpatialTooSmall {
        layer: String,
        size: usize,
        kernel: usize,
        pad: usize,
    },
    #[error("invalid architecture: {0}")]
    Architecture(String),
    #[error("invalid training config: {0}")]
    Config(String),
    #[error("optimizer step requested after {seen} of {expected} gradient slices")]
    MidAccumulation { seen: usize, expected: usize },
    #[error("slice of {got} samples does not match batch/subdivision = {expected}")]
    SliceSize { expected: usize, got: usize },
    #[error("non-finite value produced by {0}")]
    NonFinite(String),
    #[error("{path}: not a checkpoint (bad magic)")]
    BadMagic { path: PathBuf },
    #[error("{path}: checkpoint truncated ({context})")]
    Truncated { path: PathBuf, context: String },
    #[error("{path}: checkpoint layer {layer} has shape {found:?}, architecture expects {expected:?}")]
    CheckpointShape {
        path: PathBuf,
        layer: usize,
        expected: Vec<usize>,
        found: Vec<usize>,
    },
    #[error("{path}: {extra} unexpected bytes after the last layer")]
    TrailingBytes { path: PathBuf, extra: usize },
    #[error("{path}: checkpoint has {found} weighted layers, architecture has {expected}")]
    CheckpointLayerCount {
        path: PathBuf,
        expected: usize,
        found: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
