use super::{BBox, DetectError};

/// Center of a pixel-corner box.
pub fn corners_to_center(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<(f64, f64), DetectError> {
    if xmin > xmax || ymin > ymax {
        return Err(DetectError::InvertedCorners {
            xmin,
            ymin,
            xmax,
            ymax,
        });
    }
    Ok(((xmin + xmax) / 2.0, (ymin + ymax) / 2.0))
}

/// Pixel offset of a box center from the image center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterOffset {
    pub ax: f64,
    pub ay: f64,
    /// Both offsets within the tolerance.
    pub centered: bool,
}

pub fn center_offset(bbox: &BBox, img_w: f64, img_h: f64, tolerance: f64) -> CenterOffset {
    let ax = bbox.cx * img_w - img_w / 2.0;
    let ay = bbox.cy * img_h - img_h / 2.0;
    CenterOffset {
        ax,
        ay,
        centered: ax.abs() <= tolerance && ay.abs() <= tolerance,
    }
}

/// Intersection over union; 0 for disjoint or degenerate boxes.
pub fn iou(a: &BBox, b: &BBox) -> f64 {
    let (ax0, ay0, ax1, ay1) = a.corners();
    let (bx0, by0, bx1, by1) = b.corners();
    let ix = (ax1.min(bx1) - ax0.max(bx0)).max(0.0);
    let iy = (ay1.min(by1) - ay0.max(by0)).max(0.0);
    let inter = ix * iy;
    let union = a.area() + b.area() - inter;
    if union <= 0.0 {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}
