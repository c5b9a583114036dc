//! Suppression by repeated selection of the best remaining box.

use trashwatch::detector::{iou, Detection};

/// Pick the highest-scoring live detection (first in input order on ties),
/// keep it, kill every live same-class detection overlapping it by more than
/// `thr`, repeat.
pub fn reference_nms(dets: &[Detection], thr: f64) -> Vec<Detection> {
    let mut alive = vec![true; dets.len()];
    let mut kept = Vec::new();
    loop {
        let mut best: Option<usize> = None;
        for i in 0..dets.len() {
            if alive[i] && best.map_or(true, |b| dets[i].score > dets[b].score) {
                best = Some(i);
            }
        }
        let Some(b) = best else {
            return kept;
        };
        alive[b] = false;
        kept.push(dets[b]);
        for i in 0..dets.len() {
            if alive[i] && dets[i].bbox.class_id == dets[b].bbox.class_id && iou(&dets[i].bbox, &dets[b].bbox) > thr {
                alive[i] = false;
            }
        }
    }
}
