use super::{
    average_precision, f1_score, f2_score, match_detections, mean_average_precision, precision, sensitivity,
    ClassCounts, PrCurve, ScoredResult,
};
use crate::detector::{BBox, Detection};
use serde::Serialize;
use std::fmt::Write as _;

/// Accumulates matching results over a dataset.
#[derive(Debug, Clone)]
pub struct Evaluation {
    iou_threshold: f64,
    scored: Vec<Vec<ScoredResult>>,
    num_gt: Vec<usize>,
    frame_tn: usize,
    images: usize,
}

impl Evaluation {
    pub fn new(num_classes: usize, iou_threshold: f64) -> Self {
        Self {
            iou_threshold,
            scored: vec![Vec::new(); num_classes],
            num_gt: vec![0; num_classes],
            frame_tn: 0,
            images: 0,
        }
    }

    pub fn add_image(&mut self, dets: &[Detection], gt: &[BBox]) {
        let m = match_detections(dets, gt, self.iou_threshold, self.scored.len());
        for md in &m.per_detection {
            if let Some(s) = self.scored.get_mut(md.detection.class_id()) {
                s.push(ScoredResult {
                    score: md.detection.score,
                    is_tp: md.is_tp,
                });
            }
        }
        for g in gt {
            if let Some(n) = self.num_gt.get_mut(g.class_id) {
                *n += 1;
            }
        }
        self.frame_tn += m.frame_tn;
        self.images += 1;
    }

    pub fn curve(&self, class_id: usize) -> Option<PrCurve> {
        average_precision(&self.scored[class_id], self.num_gt[class_id])
    }

    /// mAP in percent over classes with ground truth.
    pub fn map(&self) -> Option<f64> {
        let aps: Vec<Option<f64>> = (0..self.scored.len()).map(|c| self.curve(c).map(|p| p.ap)).collect();
        mean_average_precision(&aps)
    }

    /// Per-class report. Counts-based metrics use detections scoring at
    /// least `score_threshold`; AP uses every detection.
    pub fn report(&self, class_names: &[String], score_threshold: f64) -> EvalReport {
        let mut rows = Vec::with_capacity(self.scored.len());
        for (c, scored) in self.scored.iter().enumerate() {
            let kept = scored.iter().filter(|s| s.score >= score_threshold);
            let tp = kept.clone().filter(|s| s.is_tp).count();
            let fp = kept.count() - tp;
            let counts = ClassCounts {
                tp,
                fp,
                fn_: self.num_gt[c] - tp,
            };
            let pre = precision(counts.tp, counts.fp);
            let sen = sensitivity(counts.tp, counts.fn_);
            let both = pre.zip(sen);
            let ap = self.curve(c).map(|p| p.ap * 100.0);
            if ap.is_none() {
                log::info!("class {c} has no ground truth; excluded from mAP");
            }
            rows.push(ClassRow {
                class: class_names.get(c).cloned().unwrap_or_else(|| c.to_string()),
                gt: self.num_gt[c],
                tp: counts.tp,
                fp: counts.fp,
                fn_: counts.fn_,
                precision: pre,
                sensitivity: sen,
                f1: both.and_then(|(p, s)| f1_score(p, s)),
                f2: both.and_then(|(p, s)| f2_score(p, s)),
                ap,
            });
        }
        let total = rows.iter().fold(ClassCounts::default(), |mut acc, r| {
            acc += ClassCounts {
                tp: r.tp,
                fp: r.fp,
                fn_: r.fn_,
            };
            acc
        });
        let pre = precision(total.tp, total.fp);
        let sen = sensitivity(total.tp, total.fn_);
        EvalReport {
            rows,
            map: self.map(),
            precision: pre,
            sensitivity: sen,
            f1: pre.zip(sen).and_then(|(p, s)| f1_score(p, s)),
            f2: pre.zip(sen).and_then(|(p, s)| f2_score(p, s)),
            frame_tn: self.frame_tn,
            images: self.images,
            iou_threshold: self.iou_threshold,
            score_threshold,
        }
    }
}

/// Metrics of one class; percentages, `None` where undefined.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassRow {
    pub class: String,
    pub gt: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: Option<f64>,
    pub sensitivity: Option<f64>,
    pub f1: Option<f64>,
    pub f2: Option<f64>,
    pub ap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EvalReport {
    pub rows: Vec<ClassRow>,
    pub map: Option<f64>,
    pub precision: Option<f64>,
    pub sensitivity: Option<f64>,
    pub f1: Option<f64>,
    pub f2: Option<f64>,
    pub frame_tn: usize,
    pub images: usize,
    pub iou_threshold: f64,
    pub score_threshold: f64,
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"))
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<18} {:>5} {:>5} {:>5} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8}",
            "class", "gt", "tp", "fp", "fn", "prec", "sens", "f1", "f2", "ap"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<18} {:>5} {:>5} {:>5} {:>5} {:>8} {:>8} {:>8} {:>8} {:>8}",
                r.class,
                r.gt,
                r.tp,
                r.fp,
                r.fn_,
                pct(r.precision),
                pct(r.sensitivity),
                pct(r.f1),
                pct(r.f2),
                pct(r.ap)
            );
        }
        let _ = writeln!(
            out,
            "mAP@{} = {}  precision = {}  sensitivity = {}  f1 = {}  f2 = {}  (score >= {})",
            self.iou_threshold,
            pct(self.map),
            pct(self.precision),
            pct(self.sensitivity),
            pct(self.f1),
            pct(self.f2),
            self.score_threshold
        );
        let _ = writeln!(out, "images = {}  frame TN = {}", self.images, self.frame_tn);
        out
    }

    /// One JSON object per class, then a summary object.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let mut v = serde_json::to_value(r).expect("plain data");
            v["record"] = "class".into();
            out.push_str(&v.to_string());
            out.push('\n');
        }
        let summary = serde_json::json!({
            "record": "summary",
            "map": self.map,
            "precision": self.precision,
            "sensitivity": self.sensitivity,
            "f1": self.f1,
            "f2": self.f2,
            "frameTn": self.frame_tn,
            "images": self.images,
            "iouThreshold": self.iou_threshold,
            "scoreThreshold": self.score_threshold,
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}

impl PrCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("recall,precision\n");
        for (r, p) in &self.points {
            let _ = writeln!(out, "{r},{p}");
        }
        out
    }
}
