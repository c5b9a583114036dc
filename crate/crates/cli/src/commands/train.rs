use std::sync::atomic::AtomicBool;

use anyhow::{Context, Result};
use trashwatch::data::{Dataset, Split};
use trashwatch::netcore::checkpoint::final_path;
use trashwatch::netcore::{save_checkpoint, Network};
use trashwatch::train::{run_training, RunOptions, Trainer};

use super::{arch, load_network, require};
use crate::args::{Cli, TrainArgs};
use crate::{InputError, UsageError};

pub fn run(cli: &Cli, a: &TrainArgs, stop: &AtomicBool) -> Result<()> {
    let data_dir = require(&a.data, "data")?;
    let cfg = a.train_config(cli.seed);
    cfg.validate().map_err(|e| UsageError(e.to_string()))?;
    if let Some(m) = a.stop_at_map {
        super::check_range("stop-at-map", m, 0.0, 100.0)?;
    }
    // Usage errors before touching the disk.
    arch(cli, cli.model, 1)?;

    let ds = Dataset::load(data_dir).with_context(|| format!("loading dataset {}", data_dir.display()))?;
    let train = ds.split(Split::Train);
    if train.is_empty() {
        return Err(InputError(format!("{}: the training split is empty", data_dir.display())).into());
    }
    let spec = arch(cli, cli.model, ds.num_classes())?;
    let (net, start) = match &a.resume {
        Some(path) => load_network(path, &spec)?,
        None => (Network::new(&spec, cli.seed)?, 0),
    };
    log::info!(
        "{} model, {} training / {} test images, iterations {start}..{}",
        cli.model,
        train.len(),
        ds.split(Split::Test).len(),
        cfg.iterations
    );

    if cfg.iterations == 0 {
        std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
        let path = final_path(&a.out);
        save_checkpoint(&net, 0, &path)?;
        println!("wrote initial weights to {}", path.display());
        return Ok(());
    }

    let mut trainer = Trainer::new(net, cfg.clone(), train, start)?;
    let mut opts = RunOptions::new(&a.out);
    opts.eval_every = a.eval_every;
    opts.stop_at_map = a.stop_at_map;
    let summary = run_training(&mut trainer, cfg.iterations, &opts, ds.split(Split::Test), stop, |row| {
        if row.iteration % 10 == 0 || row.map.is_some() {
            let map = row.map.map(|m| format!(" mAP {m:.2}")).unwrap_or_default();
            log::info!(
                "iteration {} loss {:.4} (coord {:.4} iou {:.4} cls {:.4}){map}",
                row.iteration,
                row.loss.total,
                row.loss.coord_err,
                row.loss.iou_err,
                row.loss.cls_err
            );
        }
    })?;
    if summary.interrupted {
        log::warn!("interrupted at iteration {}", summary.iteration);
    }
    println!(
        "iteration {} final checkpoint {}{}",
        summary.iteration,
        summary.final_checkpoint.display(),
        summary.last_map.map(|m| format!(" mAP {m:.2}")).unwrap_or_default()
    );
    Ok(())
}
