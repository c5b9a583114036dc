/// One detection of a class, already classified by matching.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredResult {
    pub score: f64,
    pub is_tp: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrCurve {
    /// `(recall, precision)` as fractions, one point per distinct score,
    /// from the highest score down.
    pub points: Vec<(f64, f64)>,
    /// Area under the precision envelope, in [0, 1].
    pub ap: f64,
}

/// All-point interpolated AP for one class with `num_gt` ground-truth boxes.
/// Detections with equal scores enter the curve together, so every point is
/// reachable by some score threshold. `None` when the class has no ground
/// truth.
pub fn average_precision(results: &[ScoredResult], num_gt: usize) -> Option<PrCurve> {
    if num_gt == 0 {
        return None;
    }
    let mut sorted = results.to_vec();
    sorted.sort_by(|a, b| b.score.total_cmp(&a.score));
    let mut points = Vec::new();
    let (mut tp, mut fp) = (0usize, 0usize);
    for (i, r) in sorted.iter().enumerate() {
        if r.is_tp {
            tp += 1;
        } else {
            fp += 1;
        }
        let group_ends = sorted.get(i + 1).map_or(true, |next| next.score != r.score);
        if group_ends {
            points.push((tp as f64 / num_gt as f64, tp as f64 / (tp + fp) as f64));
        }
    }
    let mut ap = 0.0;
    let mut envelope = 0.0f64;
    let mut upper = points.last().map_or(0.0, |p| p.0);
    for &(r, p) in points.iter().rev() {
        // Between this point's recall and the next higher one, the envelope
        // is the best precision at or beyond it.
        ap += (upper - r) * envelope;
        envelope = envelope.max(p);
        upper = r;
    }
    ap += upper * envelope;
    Some(PrCurve { points, ap })
}

/// Unweighted mean of the defined per-class APs, in percent. Classes without
/// ground truth are skipped; `None` if no class has any.
pub fn mean_average_precision(per_class: &[Option<f64>]) -> Option<f64> {
    let defined: Vec<f64> = per_class.iter().flatten().copied().collect();
    if defined.is_empty() {
        return None;
    }
    Some(defined.iter().sum::<f64>() / defined.len() as f64 * 100.0)
}
