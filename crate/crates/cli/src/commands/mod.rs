pub mod bench;
pub mod detect;
pub mod eval;
pub mod synth;
pub mod train;
pub mod watch;

use std::path::{Path, PathBuf};

use anyhow::Result;
use trashwatch::data::CLASS_NAMES;
use trashwatch::netcore::{load_checkpoint, ArchSpec, ModelKind, Network, BOXES_PER_CELL};

use crate::args::Cli;
use crate::{InputError, UsageError};

pub fn require<'a>(value: &'a Option<PathBuf>, key: &str) -> Result<&'a Path, UsageError> {
    value.as_deref().ok_or_else(|| {
        UsageError(format!("missing --{} (or `{key}` in the config file)", key.replace('_', "-")))
    })
}

pub fn check_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<(), UsageError> {
    if v.is_finite() && (lo..=hi).contains(&v) {
        Ok(())
    } else {
        Err(UsageError(format!("--{name} must be in [{lo}, {hi}], got {v}")))
    }
}

pub fn arch(cli: &Cli, kind: ModelKind, num_classes: usize) -> Result<ArchSpec, UsageError> {
    let side = cli.input_size;
    if side < 32 || side % 32 != 0 {
        return Err(UsageError(format!("--input-size must be a positive multiple of 32, got {side}")));
    }
    Ok(ArchSpec::scaled(kind, side, 1, num_classes, BOXES_PER_CELL))
}

/// Weights and the iteration they were saved at.
pub fn load_network(path: &Path, spec: &ArchSpec) -> Result<(Network<f32>, u64)> {
    let (net, iteration) = load_checkpoint(path, spec).map_err(|e| InputError(e.to_string()))?;
    log::info!("loaded {} (iteration {iteration})", path.display());
    Ok((net, iteration))
}

pub fn default_class_names() -> Vec<String> {
    CLASS_NAMES.iter().map(|s| s.to_string()).collect()
}
