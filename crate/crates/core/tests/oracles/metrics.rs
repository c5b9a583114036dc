//! Brute-force matching and AP by sweeping every score threshold.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use trashwatch::detector::{BBox, Detection};
use trashwatch::evalx::{match_detections, Evaluation};

fn area_iou(a: &BBox, b: &BBox) -> f64 {
    let ax = (a.cx - a.w / 2.0, a.cx + a.w / 2.0);
    let ay = (a.cy - a.h / 2.0, a.cy + a.h / 2.0);
    let bx = (b.cx - b.w / 2.0, b.cx + b.w / 2.0);
    let by = (b.cy - b.h / 2.0, b.cy + b.h / 2.0);
    let w = (ax.1.min(bx.1) - ax.0.max(bx.0)).max(0.0);
    let h = (ay.1.min(by.1) - ay.0.max(by.0)).max(0.0);
    let inter = w * h;
    let union = a.w * a.h + b.w * b.h - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

/// Per detection (in input order): true positive or not. Detections are
/// visited by descending score with ties in input order; each takes the
/// same-class ground truth of highest IoU (lowest index on ties) and is a
/// hit if that IoU reaches the threshold and the box is still free.
pub fn brute_force_match(dets: &[Detection], gt: &[BBox], thr: f64) -> Vec<bool> {
    let mut visited = vec![false; dets.len()];
    let mut taken = vec![false; gt.len()];
    let mut hit = vec![false; dets.len()];
    for _ in 0..dets.len() {
        // Select the next detection by scanning everything left.
        let mut next: Option<usize> = None;
        for i in 0..dets.len() {
            if !visited[i] && next.map_or(true, |n| dets[i].score > dets[n].score) {
                next = Some(i);
            }
        }
        let i = next.unwrap();
        visited[i] = true;
        let mut best: Option<usize> = None;
        for j in 0..gt.len() {
            if gt[j].class_id == dets[i].bbox.class_id
                && best.map_or(true, |k| area_iou(&dets[i].bbox, &gt[j]) > area_iou(&dets[i].bbox, &gt[k]))
            {
                best = Some(j);
            }
        }
        if let Some(j) = best {
            if area_iou(&dets[i].bbox, &gt[j]) >= thr && !taken[j] {
                taken[j] = true;
                hit[i] = true;
            }
        }
    }
    hit
}

/// AP from `(score, hit)` pairs: precision and recall at every distinct
/// score threshold, then the area under the running-max-from-the-right
/// precision envelope.
pub fn sweep_ap(results: &[(f64, bool)], num_gt: usize) -> Option<f64> {
    if num_gt == 0 {
        return None;
    }
    let mut thresholds: Vec<f64> = results.iter().map(|r| r.0).collect();
    thresholds.sort_by(|a, b| b.total_cmp(a));
    thresholds.dedup();
    let points: Vec<(f64, f64)> = thresholds
        .iter()
        .map(|&t| {
            let kept: Vec<_> = results.iter().filter(|r| r.0 >= t).collect();
            let tp = kept.iter().filter(|r| r.1).count();
            (tp as f64 / num_gt as f64, tp as f64 / kept.len() as f64)
        })
        .collect();
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for k in 0..points.len() {
        let best = points[k..].iter().map(|p| p.1).fold(0.0, f64::max);
        ap += (points[k].0 - prev_recall) * best;
        prev_recall = points[k].0;
    }
    Some(ap)
}

pub struct Scene {
    pub images: Vec<(Vec<Detection>, Vec<BBox>)>,
    pub classes: usize,
}

/// A few images, ≤ 10 ground-truth boxes each, detections near ground
/// truth or random, scores on a coarse grid so ties are common.
pub fn random_scene(seed: u64) -> Scene {
    let mut r = Xoshiro256PlusPlus::seed_from_u64(seed);
    let classes = r.gen_range(1..=3);
    let images = (0..r.gen_range(1..=3))
        .map(|_| {
            let gt: Vec<BBox> = (0..r.gen_range(0..=10))
                .map(|_| {
                    BBox::new(
                        r.gen_range(0.1..0.9),
                        r.gen_range(0.1..0.9),
                        r.gen_range(0.05..0.4),
                        r.gen_range(0.05..0.4),
                        r.gen_range(0..classes),
                    )
                })
                .collect();
            let mut dets = Vec::new();
            for g in &gt {
                for _ in 0..r.gen_range(0..=2) {
                    let jitter = |r: &mut Xoshiro256PlusPlus, v: f64, s: f64| (v + r.gen_range(-s..s)).clamp(0.01, 0.99);
                    let class = if r.gen_bool(0.85) { g.class_id } else { r.gen_range(0..classes) };
                    dets.push(BBox::new(
                        jitter(&mut r, g.cx, 0.05),
                        jitter(&mut r, g.cy, 0.05),
                        jitter(&mut r, g.w, 0.05),
                        jitter(&mut r, g.h, 0.05),
                        class,
                    ));
                }
            }
            for _ in 0..r.gen_range(0..=3) {
                dets.push(BBox::new(
                    r.gen_range(0.1..0.9),
                    r.gen_range(0.1..0.9),
                    r.gen_range(0.05..0.4),
                    r.gen_range(0.05..0.4),
                    r.gen_range(0..classes),
                ));
            }
            let dets = dets
                .into_iter()
                .map(|bbox| Detection {
                    bbox,
                    score: r.gen_range(1..=10) as f64 / 10.0,
                })
                .collect();
            (dets, gt)
        })
        .collect();
    Scene { images, classes }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MetricOracleStats {
    pub scenes: usize,
    pub count_mismatches: usize,
    pub worst_ap_diff: f64,
    pub ap_presence_mismatches: usize,
}

/// Library matcher and AP against the brute-force versions.
pub fn run_metric_oracle(count: usize, thr: f64) -> MetricOracleStats {
    let mut s = MetricOracleStats::default();
    for seed in 0..count as u64 {
        let scene = random_scene(seed);
        let mut ev = Evaluation::new(scene.classes, thr);
        let mut per_class: Vec<Vec<(f64, bool)>> = vec![Vec::new(); scene.classes];
        let mut num_gt = vec![0usize; scene.classes];
        for (dets, gt) in &scene.images {
            ev.add_image(dets, gt);
            let lib = match_detections(dets, gt, thr, scene.classes);
            let hits = brute_force_match(dets, gt, thr);
            for c in 0..scene.classes {
                let tp = dets.iter().zip(&hits).filter(|(d, h)| d.bbox.class_id == c && **h).count();
                let fp = dets.iter().zip(&hits).filter(|(d, h)| d.bbox.class_id == c && !**h).count();
                let n = gt.iter().filter(|g| g.class_id == c).count();
                let counts = lib.counts[c];
                if (counts.tp, counts.fp, counts.fn_) != (tp, fp, n - tp) {
                    s.count_mismatches += 1;
                }
                num_gt[c] += n;
            }
            for (d, h) in dets.iter().zip(&hits) {
                per_class[d.bbox.class_id].push((d.score, *h));
            }
        }
        for c in 0..scene.classes {
            let lib = ev.curve(c).map(|p| p.ap);
            let oracle = sweep_ap(&per_class[c], num_gt[c]);
            match (lib, oracle) {
                (Some(a), Some(b)) => s.worst_ap_diff = s.worst_ap_diff.max((a - b).abs()),
                (None, None) => {}
                _ => s.ap_presence_mismatches += 1,
            }
        }
        s.scenes += 1;
    }
    s
}
