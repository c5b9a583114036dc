//! Annotations, images, augmentation, frame ingestion, synthetic scenes and
//! the on-disk dataset layout.

mod annotation;
mod dataset;
mod error;
mod font;
mod frames;
mod image;
mod ppm;
mod synth;
mod transform;

pub use annotation::{parse_annotation, read_annotation, serialize_annotation, write_annotation, Annotation};
pub use dataset::{epoch_order, sample_rng, write_dataset, Dataset, Sample, Split};
pub use error::DataError;
pub use font::{draw_text, text_size};
pub use frames::{frame_number, ingest_frame_sequence, numbered_frames};
pub use image::Image;
pub use ppm::{decode_ppm, encode_ppm, read_ppm, write_ppm};
pub use synth::{generate_scene, render_scene, ClassStyle, Placement, SceneSpec, ShapeKind};
pub use transform::{augment_hsv, hsv_to_rgb, resize_bilinear, rgb_to_hsv, HsvJitter};

/// Trash categories, in class-id order.
pub const CLASS_NAMES: [&str; 8] = [
    "mask",
    "tissue papers",
    "shoppers",
    "boxes",
    "automobile parts",
    "pampers",
    "bottles",
    "juice boxes",
];
