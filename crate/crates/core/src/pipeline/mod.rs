//! Watch mode: read frames, detect, and record a fixed-length clip with a
//! manifest and an event-log entry whenever something is detected.

mod clip;
mod event;
mod latency;
mod recorder;
mod source;
mod watch;

pub use clip::{annotate, ClipWriter};
pub use event::{DetectionRecord, EventRecord, EventState};
pub use latency::{measure_latency, LatencyStats};
pub use recorder::{clip_frames, Action, Mode, Recorder};
pub use source::{DirSource, FrameSource, RawSource, SourceInfo};
pub use watch::{run_watch, FrameDetector, WatchConfig, WatchSummary};

/// Length of a recorded clip.
pub const CLIP_SECONDS: f64 = 10.0;
