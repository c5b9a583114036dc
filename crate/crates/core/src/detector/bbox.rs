use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("class {class} out of range for {num_classes} classes")]
    ClassOutOfRange { class: usize, num_classes: usize },
    #[error("inverted corners: ({xmin}, {ymin}) .. ({xmax}, {ymax})")]
    InvertedCorners {
        xmin: f64,
        ymin: f64,
        xmax: f64,
        ymax: f64,
    },
    #[error("head tensor shape {got:?} does not match expected {expected:?}")]
    ShapeMismatch { expected: Vec<usize>, got: Vec<usize> },
}

/// Normalized center-format box: all coordinates are fractions of the image
/// width or height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub class_id: usize,
    /// Objectness; absent on ground truth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
}

impl BBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64, class_id: usize) -> Self {
        Self {
            cx,
            cy,
            w,
            h,
            class_id,
            confidence: None,
        }
    }

    /// Box from pixel corners in an image of the given size.
    pub fn from_corners(
        xmin: f64,
        ymin: f64,
        xmax: f64,
        ymax: f64,
        img_w: f64,
        img_h: f64,
        class_id: usize,
    ) -> Result<Self, DetectError> {
        let (x0, y0) = super::corners_to_center(xmin, ymin, xmax, ymax)?;
        Ok(Self::new(
            x0 / img_w,
            y0 / img_h,
            (xmax - xmin) / img_w,
            (ymax - ymin) / img_h,
            class_id,
        ))
    }

    pub fn validate(&self, num_classes: usize) -> Result<(), DetectError> {
        let unit = |v: f64| v.is_finite() && (0.0..=1.0).contains(&v);
        if !unit(self.cx) || !unit(self.cy) {
            return Err(DetectError::InvalidBox(format!(
                "center ({}, {}) outside [0, 1]",
                self.cx, self.cy
            )));
        }
        if !(unit(self.w) && self.w > 0.0 && unit(self.h) && self.h > 0.0) {
            return Err(DetectError::InvalidBox(format!(
                "size {} x {} outside (0, 1]",
                self.w, self.h
            )));
        }
        if self.class_id >= num_classes {
            return Err(DetectError::ClassOutOfRange {
                class: self.class_id,
                num_classes,
            });
        }
        if let Some(c) = self.confidence {
            if !(c.is_finite() && (0.0..=1.0).contains(&c)) {
                return Err(DetectError::InvalidBox(format!("confidence {c} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// `(xmin, ymin, xmax, ymax)` in normalized units.
    pub fn corners(&self) -> (f64, f64, f64, f64) {
        (
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )
    }

    pub fn area(&self) -> f64 {
        self.w.max(0.0) * self.h.max(0.0)
    }
}

/// A decoded box with its class-specific score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub bbox: BBox,
    pub score: f64,
}

impl Detection {
    pub fn class_id(&self) -> usize {
        self.bbox.class_id
    }
}
