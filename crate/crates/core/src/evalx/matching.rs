use crate::detector::{iou, BBox, Detection};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchedDetection {
    pub detection: Detection,
    pub gt_index: Option<usize>,
    pub is_tp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassCounts {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
}

impl std::ops::AddAssign for ClassCounts {
    fn add_assign(&mut self, o: Self) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.fn_ += o.fn_;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// In matching order: descending score, ties in input order.
    pub per_detection: Vec<MatchedDetection>,
    /// Indexed by class id.
    pub counts: Vec<ClassCounts>,
    /// 1 when the image has neither ground truth nor detections.
    pub frame_tn: usize,
}

/// Greedy matching by descending score. Each detection looks at the
/// same-class ground-truth box it overlaps most; it is a true positive if
/// that overlap reaches `iou_threshold` and the box is still unmatched,
/// otherwise a false positive. Unmatched ground truth counts as missed.
pub fn match_detections(dets: &[Detection], gt: &[BBox], iou_threshold: f64, num_classes: usize) -> MatchResult {
    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| dets[b].score.total_cmp(&dets[a].score));
    let mut taken = vec![false; gt.len()];
    let mut counts = vec![ClassCounts::default(); num_classes];
    let mut per_detection = Vec::with_capacity(dets.len());
    for i in order {
        let d = dets[i];
        let mut best: Option<(usize, f64)> = None;
        for (j, g) in gt.iter().enumerate() {
            if g.class_id != d.class_id() {
                continue;
            }
            let o = iou(&d.bbox, g);
            if best.map_or(true, |(_, b)| o > b) {
                best = Some((j, o));
            }
        }
        let hit = best.filter(|&(j, o)| o >= iou_threshold && !taken[j]).map(|(j, _)| j);
        if let Some(j) = hit {
            taken[j] = true;
        }
        if let Some(c) = counts.get_mut(d.class_id()) {
            if hit.is_some() {
                c.tp += 1;
            } else {
                c.fp += 1;
            }
        }
        per_detection.push(MatchedDetection {
            detection: d,
            gt_index: hit,
            is_tp: hit.is_some(),
        });
    }
    for (g, _) in gt.iter().zip(&taken).filter(|(_, t)| !**t) {
        if let Some(c) = counts.get_mut(g.class_id) {
            c.fn_ += 1;
        }
    }
    MatchResult {
        per_detection,
        counts,
        frame_tn: usize::from(gt.is_empty() && dets.is_empty()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn det(b: BBox, score: f64) -> Detection {
        Detection { bbox: b, score }
    }

    #[test]
    fn clean_hit() {
        let g = BBox::new(0.5, 0.5, 0.2, 0.2, 0);
        let d = BBox::new(0.51, 0.5, 0.2, 0.2, 0);
        let r = match_detections(&[det(d, 0.9)], &[g], 0.5, 1);
        assert_eq!(r.counts[0], ClassCounts { tp: 1, fp: 0, fn_: 0 });
        assert_eq!(r.per_detection[0].gt_index, Some(0));
    }

    #[test]
    fn below_threshold() {
        let g = BBox::new(0.5, 0.5, 0.2, 0.2, 0);
        let d = BBox::new(0.6, 0.5, 0.2, 0.2, 0);
        assert!(iou(&g, &d) < 0.5);
        let r = match_detections(&[det(d, 0.9)], &[g], 0.5, 1);
        assert_eq!(r.counts[0], ClassCounts { tp: 0, fp: 1, fn_: 1 });
    }

    #[test]
    fn double_detection_penalized() {
        let g = BBox::new(0.5, 0.5, 0.2, 0.2, 0);
        let r = match_detections(&[det(g, 0.8), det(g, 0.9)], &[g], 0.5, 1);
        assert_eq!(r.counts[0], ClassCounts { tp: 1, fp: 1, fn_: 0 });
        assert!(r.per_detection[0].is_tp);
        assert_eq!(r.per_detection[0].detection.score, 0.9);
    }

    #[test]
    fn wrong_class_is_fp_and_miss() {
        let g = BBox::new(0.5, 0.5, 0.2, 0.2, 0);
        let d = BBox { class_id: 1, ..g };
        let r = match_detections(&[det(d, 0.9)], &[g], 0.5, 2);
        assert_eq!(r.counts[0], ClassCounts { tp: 0, fp: 0, fn_: 1 });
        assert_eq!(r.counts[1], ClassCounts { tp: 0, fp: 1, fn_: 0 });
    }

    #[test]
    fn empty_frame_is_true_negative() {
        assert_eq!(match_detections(&[], &[], 0.5, 3).frame_tn, 1);
        let g = BBox::new(0.5, 0.5, 0.2, 0.2, 0);
        assert_eq!(match_detections(&[], &[g], 0.5, 3).frame_tn, 0);
    }
}
