use std::path::Path;

use anyhow::{Context, Result};
use trashwatch::data::{Dataset, Sample, Split};
use trashwatch::detector::Detection;
use trashwatch::evalx::{EvalReport, Evaluation};
use trashwatch::infer::{evaluate, Detector};
use trashwatch::netcore::ModelKind;

use super::{arch, check_range, load_network, require};
use crate::args::{Cli, EvalArgs, Format, SplitArg};
use crate::{InputError, UsageError};

fn oracle_evaluation(samples: &[Sample], num_classes: usize, iou: f64) -> Evaluation {
    let mut ev = Evaluation::new(num_classes, iou);
    for s in samples {
        let dets: Vec<Detection> = s
            .annotation
            .boxes
            .iter()
            .map(|b| Detection {
                bbox: *b,
                score: 1.0,
            })
            .collect();
        ev.add_image(&dets, &s.annotation.boxes);
    }
    ev
}

fn model_evaluation(cli: &Cli, a: &EvalArgs, kind: ModelKind, ckpt: &Path, ds: &Dataset, samples: &[Sample]) -> Result<Evaluation> {
    let spec = arch(cli, kind, ds.num_classes())?;
    let (net, _) = load_network(ckpt, &spec)?;
    let det = Detector {
        net,
        conf_threshold: a.curve_conf,
        nms_iou: a.nms,
    };
    Ok(evaluate(&det, samples, a.iou)?)
}

fn write_curves(dir: &Path, tag: &str, ev: &Evaluation, names: &[String]) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (c, name) in names.iter().enumerate() {
        if let Some(curve) = ev.curve(c) {
            let file = dir.join(format!("pr_{tag}{c}_{}.csv", name.replace(|ch: char| !ch.is_ascii_alphanumeric(), "_")));
            std::fs::write(&file, curve.to_csv()).with_context(|| format!("writing {}", file.display()))?;
        }
    }
    Ok(())
}

/// Two text reports in adjacent columns.
pub fn side_by_side(left_title: &str, left: &str, right_title: &str, right: &str) -> String {
    let l: Vec<&str> = std::iter::once(left_title).chain(left.lines()).collect();
    let r: Vec<&str> = std::iter::once(right_title).chain(right.lines()).collect();
    let width = l.iter().map(|s| s.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for i in 0..l.len().max(r.len()) {
        let a = l.get(i).copied().unwrap_or("");
        let b = r.get(i).copied().unwrap_or("");
        let line = format!("{a:<width$} | {b}");
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

fn jsonl_tagged(report: &EvalReport, tag: &str) -> String {
    report
        .to_jsonl()
        .lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).expect("report emits JSON");
            v["model"] = tag.into();
            format!("{v}\n")
        })
        .collect()
}

pub fn run(cli: &Cli, a: &EvalArgs) -> Result<()> {
    let data_dir = require(&a.data, "data")?;
    check_range("iou", a.iou, f64::MIN_POSITIVE, 1.0)?;
    check_range("nms", a.nms, 0.0, 1.0)?;
    check_range("curve-conf", a.curve_conf, 0.0, 1.0)?;
    if !(a.conf.is_finite() && a.conf >= 0.0) {
        return Err(UsageError(format!("--conf must be non-negative, got {}", a.conf)).into());
    }
    if a.oracle && a.compare.is_some() {
        return Err(UsageError("--oracle and --compare cannot be combined".into()).into());
    }
    let ckpt = if a.oracle { None } else { Some(require(&a.checkpoint, "checkpoint")?) };

    let ds = Dataset::load(data_dir).with_context(|| format!("loading dataset {}", data_dir.display()))?;
    let split = match a.split {
        SplitArg::Train => Split::Train,
        SplitArg::Test => Split::Test,
    };
    let samples = ds.split(split);
    if samples.is_empty() {
        return Err(InputError(format!("{}: the {:?} split is empty", data_dir.display(), a.split).to_lowercase()).into());
    }

    let first = match ckpt {
        None => oracle_evaluation(samples, ds.num_classes(), a.iou),
        Some(path) => model_evaluation(cli, a, cli.model, path, &ds, samples)?,
    };
    let first_tag = if a.oracle { "oracle".to_string() } else { cli.model.to_string() };
    let second = match &a.compare {
        Some(path) => {
            let kind = a.compare_model.unwrap_or(cli.model);
            Some((kind.to_string(), model_evaluation(cli, a, kind, path, &ds, samples)?))
        }
        None => None,
    };

    if let Some(dir) = &a.pr_dir {
        let prefix = if second.is_some() { format!("{first_tag}_") } else { String::new() };
        write_curves(dir, &prefix, &first, &ds.class_names)?;
        if let Some((tag, ev)) = &second {
            write_curves(dir, &format!("{tag}_"), ev, &ds.class_names)?;
        }
    }

    let r1 = first.report(&ds.class_names, a.conf);
    let out = match (&second, a.format) {
        (None, Format::Text) => r1.to_text(),
        (None, Format::Jsonl) => r1.to_jsonl(),
        (Some((tag, ev)), Format::Text) => {
            let r2 = ev.report(&ds.class_names, a.conf);
            let title = |tag: &str, p: &Path| format!("[{tag}] {}", p.display());
            side_by_side(
                &title(&first_tag, ckpt.expect("compare implies a checkpoint")),
                &r1.to_text(),
                &title(tag, a.compare.as_deref().expect("matched Some")),
                &r2.to_text(),
            )
        }
        (Some((tag, ev)), Format::Jsonl) => {
            let r2 = ev.report(&ds.class_names, a.conf);
            jsonl_tagged(&r1, &first_tag) + &jsonl_tagged(&r2, tag)
        }
    };
    print!("{out}");
    Ok(())
}
