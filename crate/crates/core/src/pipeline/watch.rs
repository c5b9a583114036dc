use super::{Action, ClipWriter, FrameSource, LatencyStats, Recorder};
use crate::data::Image;
use crate::detector::Detection;
use crate::infer::Detector;
use crate::Error;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{sync_channel, TrySendError};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

/// Anything that turns a frame into detections.
pub trait FrameDetector {
    fn detect_frame(&self, frame: u64, img: &Image) -> Result<Vec<Detection>, Error>;
}

impl FrameDetector for Detector {
    fn detect_frame(&self, _frame: u64, img: &Image) -> Result<Vec<Detection>, Error> {
        self.detect(img)
    }
}

#[derive(Debug, Clone)]
pub struct WatchConfig {
    pub clip_dir: PathBuf,
    pub event_log: PathBuf,
    /// A frame triggers when any detection scores at least this.
    pub trigger_threshold: f64,
    /// Use frame indices instead of wall-clock time in logs and manifests.
    pub deterministic: bool,
    /// Frames buffered between reader and detector.
    pub buffer: usize,
    pub class_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WatchSummary {
    pub frames: u64,
    pub detections: u64,
    pub events: u64,
    /// Frames dropped by a live source because the detector fell behind.
    pub dropped: u64,
    /// Malformed frames skipped.
    pub skipped: u64,
    pub latency: Option<LatencyStats>,
    pub interrupted: bool,
}

/// Reads frames on a separate thread and detects and records on this one.
/// Replays block the reader when the buffer is full; live sources drop
/// and count frames instead. Runs until the source ends or `stop` is set,
/// then closes any active clip as partial.
pub fn run_watch(
    mut source: Box<dyn FrameSource>,
    detector: &dyn FrameDetector,
    cfg: &WatchConfig,
    stop: &AtomicBool,
) -> Result<WatchSummary, Error> {
    let info = source.info();
    let mut writer = ClipWriter::new(&cfg.clip_dir, &cfg.event_log, info.fps, cfg.class_names.clone())?;
    let mut recorder = Recorder::new(info.fps);
    let dropped = AtomicU64::new(0);
    let (tx, rx) = sync_channel::<(u64, Result<Image, Error>)>(cfg.buffer.max(1));
    let mut summary = WatchSummary::default();
    let mut latencies = Vec::new();

    std::thread::scope(|scope| -> Result<(), Error> {
        // Owned here so an early error return also drops it, which unblocks
        // a reader waiting to send before the scope joins it.
        let rx = rx;
        let dropped = &dropped;
        scope.spawn(move || {
            let mut index = 0u64;
            while !stop.load(Ordering::SeqCst) {
                let Some(frame) = source.next_frame() else {
                    break;
                };
                let item = (index, frame);
                index += 1;
                if info.live {
                    match tx.try_send(item) {
                        Ok(()) => {}
                        Err(TrySendError::Full(_)) => {
                            let n = dropped.fetch_add(1, Ordering::Relaxed) + 1;
                            log::warn!("detector behind; dropped frame {} ({n} so far)", index - 1);
                        }
                        Err(TrySendError::Disconnected(_)) => break,
                    }
                } else if tx.send(item).is_err() {
                    break;
                }
            }
        });

        for (index, frame) in rx.iter() {
            if stop.load(Ordering::SeqCst) {
                summary.interrupted = true;
                break;
            }
            let img = match frame {
                Ok(img) => img,
                Err(e) => {
                    log::warn!("skipping frame {index}: {e}");
                    summary.skipped += 1;
                    continue;
                }
            };
            let t = Instant::now();
            let dets = detector.detect_frame(index, &img)?;
            latencies.push(t.elapsed().as_secs_f64() * 1e3);
            summary.frames += 1;
            summary.detections += dets.len() as u64;
            let triggering: Vec<Detection> =
                dets.iter().copied().filter(|d| d.score >= cfg.trigger_threshold).collect();
            for action in recorder.step(index, !triggering.is_empty()) {
                match action {
                    Action::Open { event_id, frame } => {
                        summary.events += 1;
                        let time = if cfg.deterministic { frame as f64 } else { wall_clock() };
                        writer.open(event_id, frame, time, &img, &triggering)?;
                    }
                    Action::Append { index, .. } => writer.append(index, &img),
                    Action::Retrigger { frame, .. } => writer.retrigger(frame, &triggering),
                    Action::Close { partial, .. } => {
                        writer.close(partial)?;
                    }
                }
            }
        }
        drop(rx);
        if stop.load(Ordering::SeqCst) {
            summary.interrupted = true;
        }
        Ok(())
    })?;

    for action in recorder.finish() {
        if let Action::Close { partial, .. } = action {
            writer.close(partial)?;
        }
    }
    summary.dropped = dropped.load(Ordering::Relaxed);
    summary.latency = LatencyStats::from_samples(latencies);
    Ok(summary)
}

fn wall_clock() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}
