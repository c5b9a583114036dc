use std::io::Write;

use anyhow::{Context, Result};
use serde_json::json;
use trashwatch::data::{read_ppm, write_ppm};
use trashwatch::detector::center_offset;
use trashwatch::infer::Detector;
use trashwatch::pipeline::annotate;

use super::{arch, check_range, default_class_names, load_network, require};
use crate::args::{Cli, DetectArgs};
use crate::UsageError;

pub fn run(cli: &Cli, a: &DetectArgs) -> Result<()> {
    let ckpt = require(&a.checkpoint, "checkpoint")?;
    check_range("nms", a.thresholds.nms, 0.0, 1.0)?;
    if !(a.thresholds.conf.is_finite() && a.thresholds.conf >= 0.0) {
        return Err(UsageError(format!("--conf must be non-negative, got {}", a.thresholds.conf)).into());
    }
    if !(a.tolerance.is_finite() && a.tolerance >= 0.0) {
        return Err(UsageError(format!("--tolerance must be non-negative, got {}", a.tolerance)).into());
    }
    let img = read_ppm(&a.image)?;
    let names = default_class_names();
    let spec = arch(cli, cli.model, names.len())?;
    let (net, _) = load_network(ckpt, &spec)?;
    let det = Detector {
        net,
        conf_threshold: a.thresholds.conf,
        nms_iou: a.thresholds.nms,
    };
    let dets = det.detect(&img)?;

    let mut dump = String::new();
    for d in &dets {
        let off = center_offset(&d.bbox, img.width() as f64, img.height() as f64, a.tolerance);
        let b = &d.bbox;
        let rec = json!({
            "image": a.image.display().to_string(),
            "classId": b.class_id,
            "className": names.get(b.class_id),
            "cx": b.cx,
            "cy": b.cy,
            "w": b.w,
            "h": b.h,
            "score": d.score,
            "ax": off.ax,
            "ay": off.ay,
            "centered": off.centered,
        });
        dump.push_str(&rec.to_string());
        dump.push('\n');
    }
    match &a.output {
        Some(path) => std::fs::write(path, &dump).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(dump.as_bytes())?,
    }
    if let Some(path) = &a.draw {
        write_ppm(path, &annotate(&img, &dets, &names))?;
    }
    log::info!("{} detection(s) in {}", dets.len(), a.image.display());
    Ok(())
}
