//! Box geometry, grid target encoding and decoding, the sum-squared
//! detection loss and non-maximum suppression.

mod bbox;
mod geometry;
mod grid;
mod loss;
mod nms;

pub use bbox::{BBox, DetectError, Detection};
pub use geometry::{center_offset, corners_to_center, iou, CenterOffset};
pub use grid::{decode, encode_as_head, encode_targets, CellTarget, GridTarget, HeadLayout};
pub use loss::{detection_loss, loss_and_gradient, loss_gradient, LossBreakdown, LossWeights};
pub use nms::nms;

/// Head channels per box before the class scores: tx, ty, w, h, confidence.
pub const BOX_FIELDS: usize = 5;
