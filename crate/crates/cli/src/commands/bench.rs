use anyhow::{bail, Result};
use serde_json::json;
use trashwatch::data::{generate_scene, read_ppm, resize_bilinear, sample_rng, SceneSpec, CLASS_NAMES};
use trashwatch::netcore::{flush_denormals, ModelKind, Network};
use trashwatch::pipeline::measure_latency;

use super::{arch, load_network};
use crate::args::{BenchArgs, Cli};
use crate::UsageError;

pub fn run(cli: &Cli, a: &BenchArgs) -> Result<()> {
    if a.reps == 0 {
        return Err(UsageError("--reps must be at least 1".into()).into());
    }
    let img = match &a.image {
        Some(path) => read_ppm(path)?,
        None => generate_scene(&SceneSpec::default(), &mut sample_rng(cli.seed, 0, 0)).0,
    };
    let input = resize_bilinear(&img, cli.input_size, cli.input_size).to_tensor::<f32>();
    flush_denormals();

    let mut means = Vec::new();
    for (kind, ckpt) in [
        (ModelKind::Default, &a.default_checkpoint),
        (ModelKind::Improved, &a.improved_checkpoint),
    ] {
        let spec = arch(cli, kind, CLASS_NAMES.len())?;
        let net = match ckpt {
            Some(path) => load_network(path, &spec)?.0,
            None => Network::new(&spec, cli.seed)?,
        };
        let (stats, outputs) = measure_latency(a.reps, || net.forward(&input));
        let outputs = outputs.into_iter().collect::<Result<Vec<_>, _>>()?;
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            bail!("{kind} model produced different outputs for identical input");
        }
        let line = json!({
            "model": kind.to_string(),
            "reps": a.reps,
            "meanMs": stats.mean,
            "p95Ms": stats.p95,
            "minMs": stats.min,
            "maxMs": stats.max,
            "parameters": net.parameter_count(),
        });
        println!("{line}");
        means.push(stats.mean);
    }
    println!("{}", json!({ "defaultFaster": means[0] < means[1] }));
    Ok(())
}
