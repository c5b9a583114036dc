//! Matching detections to ground truth and the usual detection metrics:
//! precision, sensitivity, F1, F2, per-class AP and mAP.

mod ap;
mod matching;
mod metrics;
mod report;

pub use ap::{average_precision, mean_average_precision, PrCurve, ScoredResult};
pub use matching::{match_detections, ClassCounts, MatchResult, MatchedDetection};
pub use metrics::{f1_score, f2_score, precision, sensitivity};
pub use report::{ClassRow, EvalReport, Evaluation};
