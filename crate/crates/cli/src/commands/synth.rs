use anyhow::Result;
use trashwatch::data::{generate_scene, sample_rng, write_dataset, SceneSpec, CLASS_NAMES};

use super::{check_range, require};
use crate::args::{Cli, SynthArgs};
use crate::UsageError;

pub fn scene_spec(a: &SynthArgs) -> Result<SceneSpec, UsageError> {
    if a.size < 16 {
        return Err(UsageError(format!("--size must be at least 16, got {}", a.size)));
    }
    if a.min_objects > a.max_objects {
        return Err(UsageError("--min-objects exceeds --max-objects".into()));
    }
    if a.min_object_size == 0 || a.min_object_size > a.max_object_size || a.max_object_size > a.size {
        return Err(UsageError(format!(
            "object sizes must satisfy 0 < {} <= {} <= {}",
            a.min_object_size, a.max_object_size, a.size
        )));
    }
    Ok(SceneSpec {
        width: a.size,
        height: a.size,
        min_objects: a.min_objects,
        max_objects: a.max_objects,
        min_size: a.min_object_size,
        max_size: a.max_object_size,
        ..SceneSpec::default()
    })
}

pub fn run(cli: &Cli, a: &SynthArgs) -> Result<()> {
    let out = require(&a.out, "out")?;
    check_range("train-fraction", a.train_fraction, 0.0, 1.0)?;
    let spec = scene_spec(a)?;

    let mut histogram = vec![0usize; CLASS_NAMES.len()];
    let scenes: Vec<_> = (0..a.count as u64)
        .map(|i| {
            let (image, ann) = generate_scene(&spec, &mut sample_rng(cli.seed, 0, i));
            for b in &ann.boxes {
                histogram[b.class_id] += 1;
            }
            (image, ann.boxes)
        })
        .collect();
    let train_count = (a.count as f64 * a.train_fraction).round() as usize;
    write_dataset(out, &CLASS_NAMES, &scenes, train_count)?;
    println!(
        "wrote {} scenes ({train_count} train, {} test) to {}; objects per class {histogram:?}",
        a.count,
        a.count - train_count,
        out.display()
    );
    Ok(())
}
