use crate::detector::{BBox, Detection};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum EventState {
    Recording,
    Complete,
    /// The stream ended before the clip was full.
    Partial,
    /// The clip could not be written.
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DetectionRecord {
    pub class_id: usize,
    pub class_name: String,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
    pub score: f64,
}

impl DetectionRecord {
    pub fn new(d: &Detection, class_names: &[String]) -> Self {
        Self {
            class_id: d.class_id(),
            class_name: class_names.get(d.class_id()).cloned().unwrap_or_default(),
            cx: d.bbox.cx,
            cy: d.bbox.cy,
            w: d.bbox.w,
            h: d.bbox.h,
            score: d.score,
        }
    }

    pub fn bbox(&self) -> BBox {
        BBox::new(self.cx, self.cy, self.w, self.h, self.class_id)
    }
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EventRecord {
    pub event_id: u64,
    pub trigger_frame: u64,
    /// Seconds since the Unix epoch, or the trigger frame index in
    /// deterministic mode.
    pub time: f64,
    pub detections: Vec<DetectionRecord>,
    pub clip_dir: PathBuf,
    pub state: EventState,
}

impl EventRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("plain data")
    }

    /// Parses one log line and checks every detection box.
    pub fn parse_line(line: &str, num_classes: usize) -> Result<Self, String> {
        let rec: Self = serde_json::from_str(line).map_err(|e| e.to_string())?;
        for d in &rec.detections {
            d.bbox().validate(num_classes).map_err(|e| e.to_string())?;
            if !(0.0..=1.0).contains(&d.score) {
                return Err(format!("score {} outside [0, 1]", d.score));
            }
        }
        Ok(rec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_round_trip() {
        let d = Detection {
            bbox: BBox::new(0.5, 0.4, 0.2, 0.1, 3),
            score: 0.875,
        };
        let rec = EventRecord {
            event_id: 2,
            trigger_frame: 17,
            time: 17.0,
            detections: vec![DetectionRecord::new(&d, &["a".into(), "b".into(), "c".into(), "d".into()])],
            clip_dir: PathBuf::from("clips/event-2"),
            state: EventState::Complete,
        };
        let line = rec.to_line();
        assert!(line.contains("\"eventId\":2") && line.contains("\"state\":\"complete\""));
        assert_eq!(EventRecord::parse_line(&line, 8).unwrap(), rec);
        assert!(EventRecord::parse_line(&line, 3).is_err());
        assert!(EventRecord::parse_line("{}", 8).is_err());
    }
}
