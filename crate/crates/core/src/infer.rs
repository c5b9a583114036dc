use crate::data::{resize_bilinear, Image};
use crate::detector::{decode, nms, Detection, HeadLayout};
use crate::netcore::{flush_denormals, Network};
use crate::Error;

/// Default score threshold for reported detections.
pub const DEFAULT_CONF: f64 = 0.25;
/// Default IoU above which same-class detections are suppressed.
pub const DEFAULT_NMS_IOU: f64 = 0.45;

/// A trained network plus the thresholds that turn its head into boxes.
#[derive(Debug, Clone)]
pub struct Detector {
    pub net: Network<f32>,
    pub conf_threshold: f64,
    pub nms_iou: f64,
}

impl Detector {
    pub fn new(net: Network<f32>) -> Self {
        Self {
            net,
            conf_threshold: DEFAULT_CONF,
            nms_iou: DEFAULT_NMS_IOU,
        }
    }

    pub fn layout(&self) -> HeadLayout {
        layout_of(&self.net)
    }

    /// Resizes to the network input, runs it and returns NMS survivors.
    /// Box coordinates are normalized, so they apply to the original image.
    pub fn detect(&self, img: &Image) -> Result<Vec<Detection>, Error> {
        flush_denormals();
        let [_, h, w] = self.net.input_shape();
        let input = resize_bilinear(img, w, h).to_tensor::<f32>();
        let head = self.net.forward(&input)?;
        let dets = decode(&head, self.layout(), self.conf_threshold)?;
        Ok(nms(&dets, self.nms_iou))
    }
}

pub fn layout_of<T: crate::netcore::Scalar>(net: &Network<T>) -> HeadLayout {
    HeadLayout::new(net.grid_size(), net.boxes_per_cell(), net.num_classes())
}

/// Runs the detector over labeled samples and accumulates matches.
pub fn evaluate(det: &Detector, samples: &[crate::data::Sample], iou_threshold: f64) -> Result<crate::evalx::Evaluation, Error> {
    let mut ev = crate::evalx::Evaluation::new(det.net.num_classes(), iou_threshold);
    for s in samples {
        ev.add_image(&det.detect(&s.image)?, &s.annotation.boxes);
    }
    Ok(ev)
}
