use super::{DetectionRecord, EventRecord, EventState};
use crate::data::{draw_text, encode_ppm, text_size, Image};
use crate::detector::Detection;
use crate::Error;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Distinct outline colors, cycled by class id.
const PALETTE: [[u8; 3]; 8] = [
    [255, 0, 0],
    [0, 255, 0],
    [0, 0, 255],
    [255, 255, 0],
    [255, 0, 255],
    [0, 255, 255],
    [255, 128, 0],
    [255, 255, 255],
];

/// Copy of `img` with a rectangle and a class label drawn for every detection.
pub fn annotate(img: &Image, dets: &[Detection], class_names: &[String]) -> Image {
    let mut out = img.clone();
    let (w, h) = (img.width() as f64, img.height() as f64);
    let thickness = ((img.width().min(img.height()) / 200).max(1)) as i64;
    let scale = (img.width().min(img.height()) / 200).max(1);
    for d in dets {
        let (x0, y0, x1, y1) = d.bbox.corners();
        let color = PALETTE[d.class_id() % PALETTE.len()];
        let (px0, py0) = ((x0 * w).round() as i64, (y0 * h).round() as i64);
        out.draw_rect(px0, py0, (x1 * w).round() as i64, (y1 * h).round() as i64, thickness, color);
        let label = match class_names.get(d.class_id()) {
            Some(name) => format!("{name} {:.2}", d.score),
            None => format!("{} {:.2}", d.class_id(), d.score),
        };
        let (_, th) = text_size(&label, scale);
        let ty = if py0 > th as i64 + 2 { py0 - th as i64 - 2 } else { py0 + thickness + 1 };
        draw_text(&mut out, px0 + 1, ty, &label, scale, [0, 0, 0], color);
    }
    out
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "camelCase")]
struct Manifest<'a> {
    event_id: u64,
    trigger_frame: u64,
    time: f64,
    fps: f64,
    clip_frames: u64,
    partial: bool,
    detections: &'a [DetectionRecord],
    /// Later frames of the same window that also had detections.
    retriggers: &'a [Retrigger],
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
struct Retrigger {
    frame: u64,
    detections: Vec<DetectionRecord>,
}

struct ActiveClip {
    record: EventRecord,
    dir: PathBuf,
    frames: u64,
    retriggers: Vec<Retrigger>,
    failed: bool,
}

/// Turns recorder actions into files: `<root>/event-<id>/frame-NNNNNN.ppm`
/// plus `manifest.json`, annotated trigger frames under
/// `<root>/snapshots/`, and one appended log line per state change.
/// A clip that cannot be written marks its event as failed; it never stops
/// the watch loop.
pub struct ClipWriter {
    root: PathBuf,
    log_path: PathBuf,
    fps: f64,
    class_names: Vec<String>,
    active: Option<ActiveClip>,
}

impl ClipWriter {
    pub fn new(root: &Path, log_path: &Path, fps: f64, class_names: Vec<String>) -> Result<Self, Error> {
        std::fs::create_dir_all(root).map_err(Error::io(format!("creating {}", root.display())))?;
        if let Some(parent) = log_path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(Error::io(format!("creating {}", parent.display())))?;
        }
        Ok(Self {
            root: root.to_path_buf(),
            log_path: log_path.to_path_buf(),
            fps,
            class_names,
            active: None,
        })
    }

    pub fn event_dir(&self, event_id: u64) -> PathBuf {
        self.root.join(format!("event-{event_id}"))
    }

    pub fn open(&mut self, event_id: u64, frame: u64, time: f64, img: &Image, dets: &[Detection]) -> Result<(), Error> {
        let dir = self.event_dir(event_id);
        let record = EventRecord {
            event_id,
            trigger_frame: frame,
            time,
            detections: dets.iter().map(|d| DetectionRecord::new(d, &self.class_names)).collect(),
            clip_dir: dir.clone(),
            state: EventState::Recording,
        };
        let written = std::fs::create_dir_all(&dir).and_then(|_| {
            let snaps = self.root.join("snapshots");
            std::fs::create_dir_all(&snaps)?;
            std::fs::write(snaps.join(format!("event-{event_id}.ppm")), encode_ppm(&annotate(img, dets, &self.class_names)))
        });
        let failed = if let Err(e) = written {
            log::error!("event {event_id}: cannot write to {}: {e}", dir.display());
            true
        } else {
            false
        };
        self.append_log(&record)?;
        self.active = Some(ActiveClip {
            record,
            dir,
            frames: 0,
            retriggers: Vec::new(),
            failed,
        });
        Ok(())
    }

    pub fn append(&mut self, index: u64, img: &Image) {
        let Some(clip) = self.active.as_mut().filter(|c| !c.failed) else {
            return;
        };
        let path = clip.dir.join(format!("frame-{index:06}.ppm"));
        if let Err(e) = std::fs::write(&path, encode_ppm(img)) {
            log::error!("event {}: cannot write {}: {e}", clip.record.event_id, path.display());
            clip.failed = true;
            return;
        }
        clip.frames += 1;
    }

    pub fn retrigger(&mut self, frame: u64, dets: &[Detection]) {
        if let Some(clip) = self.active.as_mut() {
            let detections = dets.iter().map(|d| DetectionRecord::new(d, &self.class_names)).collect();
            clip.retriggers.push(Retrigger { frame, detections });
        }
    }

    /// Writes the manifest and the final log line. Returns the final state.
    pub fn close(&mut self, partial: bool) -> Result<Option<EventState>, Error> {
        let Some(mut clip) = self.active.take() else {
            return Ok(None);
        };
        if !clip.failed {
            let manifest = Manifest {
                event_id: clip.record.event_id,
                trigger_frame: clip.record.trigger_frame,
                time: clip.record.time,
                fps: self.fps,
                clip_frames: clip.frames,
                partial,
                detections: &clip.record.detections,
                retriggers: &clip.retriggers,
            };
            let text = serde_json::to_string_pretty(&manifest).expect("plain data");
            if let Err(e) = std::fs::write(clip.dir.join("manifest.json"), text + "\n") {
                log::error!("event {}: cannot write manifest: {e}", clip.record.event_id);
                clip.failed = true;
            }
        }
        clip.record.state = match (clip.failed, partial) {
            (true, _) => EventState::Failed,
            (false, true) => EventState::Partial,
            (false, false) => EventState::Complete,
        };
        self.append_log(&clip.record)?;
        Ok(Some(clip.record.state))
    }

    fn append_log(&self, record: &EventRecord) -> Result<(), Error> {
        let ctx = || format!("appending to {}", self.log_path.display());
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.log_path)
            .map_err(Error::io(ctx()))?;
        writeln!(f, "{}", record.to_line()).map_err(Error::io(ctx()))
    }
}
