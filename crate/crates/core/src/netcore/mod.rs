//! Dense tensors, the layer zoo with exact backward passes, SGD with
//! momentum, gradient accumulation and checkpoints.

mod activation;
mod arch;
pub mod checkpoint;
mod config;
mod conv;
mod error;
mod layer;
mod network;
mod optim;
mod pool;
mod scalar;
mod tensor;

pub use activation::{logistic, Activation, LEAKY_SLOPE};
pub use arch::{ArchSpec, LayerSpec, ModelKind, BOXES_PER_CELL, GRID_SIZE, INPUT_SIDE, NUM_CLASSES};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use config::TrainConfig;
pub use conv::{conv_output_size, Conv2d, ConvGrads};
pub use error::NetError;
pub use layer::{DetectionHead, Layer, Param};
pub use network::{CONF_PRIOR_LOGIT, Network, Trace};
pub use optim::{sgd_step, GradientAccumulator};
pub use pool::MaxPool2d;
pub use scalar::{flush_denormals, Scalar};
pub use tensor::Tensor;
