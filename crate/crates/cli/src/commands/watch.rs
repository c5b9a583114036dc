use std::sync::atomic::AtomicBool;

use anyhow::Result;
use serde_json::json;
use trashwatch::infer::Detector;
use trashwatch::pipeline::{run_watch, DirSource, FrameSource, RawSource, WatchConfig};

use super::{arch, check_range, default_class_names, load_network, require};
use crate::args::{Cli, WatchArgs};
use crate::UsageError;

pub fn run(cli: &Cli, a: &WatchArgs, stop: &AtomicBool) -> Result<()> {
    let ckpt = require(&a.checkpoint, "checkpoint")?;
    if !(a.fps.is_finite() && a.fps > 0.0) {
        return Err(UsageError(format!("--fps must be positive, got {}", a.fps)).into());
    }
    check_range("trigger", a.trigger, 0.0, 1.0)?;
    check_range("nms", a.thresholds.nms, 0.0, 1.0)?;
    if a.buffer == 0 {
        return Err(UsageError("--buffer must be at least 1".into()).into());
    }
    let source: Box<dyn FrameSource> = match (&a.source, a.stdin) {
        (Some(dir), false) => Box::new(DirSource::open(dir, a.fps)?),
        (None, true) => {
            let (Some(w), Some(h)) = (a.width, a.height) else {
                return Err(UsageError("--stdin needs --width and --height".into()).into());
            };
            Box::new(RawSource::new(std::io::stdin(), w, h, a.fps)?)
        }
        _ => return Err(UsageError("give either --source <dir> or --stdin".into()).into()),
    };

    let names = default_class_names();
    let spec = arch(cli, cli.model, names.len())?;
    let (net, _) = load_network(ckpt, &spec)?;
    let det = Detector {
        net,
        conf_threshold: a.thresholds.conf.min(a.trigger),
        nms_iou: a.thresholds.nms,
    };
    let cfg = WatchConfig {
        clip_dir: a.clip_dir.clone(),
        event_log: a.event_log.clone(),
        trigger_threshold: a.trigger,
        deterministic: cli.deterministic,
        buffer: a.buffer,
        class_names: names,
    };
    let s = run_watch(source, &det, &cfg, stop)?;
    let summary = json!({
        "frames": s.frames,
        "detections": s.detections,
        "events": s.events,
        "dropped": s.dropped,
        "skipped": s.skipped,
        "meanMs": s.latency.as_ref().map(|l| l.mean),
        "p95Ms": s.latency.as_ref().map(|l| l.p95),
        "interrupted": s.interrupted,
    });
    println!("{summary}");
    Ok(())
}
