use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use trashwatch::infer::{DEFAULT_CONF, DEFAULT_NMS_IOU};
use trashwatch::netcore::{ModelKind, TrainConfig, INPUT_SIDE};
use trashwatch::train::EVAL_CONF;

/// Trash detection: training, evaluation, single-image detection and a
/// watch mode that records clips when trash shows up.
#[derive(Debug, Parser)]
#[command(name = "trashwatch", version, propagate_version = true)]
pub struct Cli {
    /// Flat `key = value` file; any key can also be given as a flag, and the
    /// flag wins.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Seed for weight init, data order, augmentation and synthetic scenes.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Replace wall-clock timestamps with frame indices in watch output.
    #[arg(long, global = true)]
    pub deterministic: bool,

    #[arg(long, global = true, default_value_t = ModelKind::Improved, value_parser = parse_model)]
    pub model: ModelKind,

    /// Network input side in pixels (a multiple of 32).
    #[arg(long, global = true, default_value_t = INPUT_SIDE)]
    pub input_size: usize,

    #[command(subcommand)]
    pub command: Command,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse()
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model on a dataset directory.
    Train(TrainArgs),
    /// Detect trash in one image.
    Detect(DetectArgs),
    /// Score a checkpoint on a dataset split.
    Eval(EvalArgs),
    /// Watch a frame stream and record a clip on every trash event.
    Watch(WatchArgs),
    /// Generate a synthetic dataset of colored shapes.
    Synth(SynthArgs),
    /// Compare forward latency of the default and improved models.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Thresholds {
    /// Minimum detection score.
    #[arg(long, default_value_t = DEFAULT_CONF)]
    pub conf: f64,

    /// IoU above which overlapping same-class boxes are suppressed.
    #[arg(long, default_value_t = DEFAULT_NMS_IOU)]
    pub nms: f64,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Dataset root (classes.txt, train.txt, test.txt, images/, labels/).
    #[arg(long, value_name = "DIR")]
    pub data: Option<PathBuf>,

    /// Output directory for checkpoints and train_log.csv.
    #[arg(long, value_name = "DIR", default_value = "runs")]
    pub out: PathBuf,

    /// Continue from a checkpoint written by an earlier run.
    #[arg(long, value_name = "FILE")]
    pub resume: Option<PathBuf>,

    #[arg(long, default_value_t = TrainConfig::default().momentum)]
    pub momentum: f64,

    /// Total iterations (optimizer steps), counted from zero.
    #[arg(long, default_value_t = TrainConfig::default().iterations)]
    pub iterations: u64,

    #[arg(long, default_value_t = TrainConfig::default().batch_size)]
    pub batch_size: usize,

    /// Slices per batch; gradients are accumulated across them.
    #[arg(long, default_value_t = TrainConfig::default().subdivision)]
    pub subdivision: usize,

    #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
    pub learning_rate: f64,

    /// Linear warm-up length in iterations (0 disables it).
    #[arg(long, default_value_t = TrainConfig::default().burn_in)]
    pub burn_in: u64,

    #[arg(long, default_value_t = TrainConfig::default().decay)]
    pub decay: f64,

    /// Value scaling range for augmentation.
    #[arg(long, default_value_t = TrainConfig::default().exposure)]
    pub exposure: f64,

    #[arg(long, default_value_t = TrainConfig::default().saturation)]
    pub saturation: f64,

    /// Hue shift range as a fraction of the hue circle.
    #[arg(long, default_value_t = TrainConfig::default().hue)]
    pub hue: f64,

    #[arg(long, default_value_t = TrainConfig::default().channels)]
    pub channels: usize,

    #[arg(long, default_value_t = TrainConfig::default().checkpoint_every)]
    pub checkpoint_every: u64,

    #[arg(long, default_value_t = TrainConfig::default().lambda_coord)]
    pub lambda_coord: f64,

    #[arg(long, default_value_t = TrainConfig::default().lambda_noobj)]
    pub lambda_noobj: f64,

    /// Disable HSV augmentation.
    #[arg(long)]
    pub no_augment: bool,

    /// Evaluate on the test split every N iterations (0: never).
    #[arg(long, default_value_t = 0)]
    pub eval_every: u64,

    /// Stop once a periodic evaluation reaches this mAP (percent).
    #[arg(long)]
    pub stop_at_map: Option<f64>,
}

impl TrainArgs {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            momentum: self.momentum,
            iterations: self.iterations,
            batch_size: self.batch_size,
            subdivision: self.subdivision,
            learning_rate: self.learning_rate,
            burn_in: self.burn_in,
            decay: self.decay,
            exposure: self.exposure,
            saturation: self.saturation,
            hue: self.hue,
            channels: self.channels,
            checkpoint_every: self.checkpoint_every,
            lambda_coord: self.lambda_coord,
            lambda_noobj: self.lambda_noobj,
            augment: !self.no_augment,
            seed,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DetectArgs {
    /// PPM image to run on.
    pub image: PathBuf,

    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,

    #[command(flatten)]
    pub thresholds: Thresholds,

    /// Pixel tolerance for the `centered` flag.
    #[arg(long, default_value_t = 20.0)]
    pub tolerance: f64,

    /// Write a copy of the image with boxes and labels drawn.
    #[arg(long, value_name = "FILE")]
    pub draw: Option<PathBuf>,

    /// Write the JSON-lines dump here instead of standard output.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SplitArg {
    Train,
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Jsonl,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "DIR")]
    pub data: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = SplitArg::Test)]
    pub split: SplitArg,

    /// IoU a detection needs with its ground truth to count as a hit.
    #[arg(long, default_value_t = 0.5)]
    pub iou: f64,

    /// Score threshold for precision/sensitivity counts.
    #[arg(long, default_value_t = DEFAULT_CONF)]
    pub conf: f64,

    /// Lowest score kept when building precision-recall curves.
    #[arg(long, default_value_t = EVAL_CONF)]
    pub curve_conf: f64,

    #[arg(long, default_value_t = DEFAULT_NMS_IOU)]
    pub nms: f64,

    /// Second checkpoint to report side by side with the first.
    #[arg(long, value_name = "FILE")]
    pub compare: Option<PathBuf>,

    /// Model configuration of the `--compare` checkpoint.
    #[arg(long, value_parser = parse_model)]
    pub compare_model: Option<ModelKind>,

    /// Score the labels against themselves instead of running a model.
    #[arg(long)]
    pub oracle: bool,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Write one precision-recall CSV per class into this directory.
    #[arg(long, value_name = "DIR")]
    pub pr_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct WatchArgs {
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,

    /// Directory of numbered PPM frames to replay.
    #[arg(long, value_name = "DIR")]
    pub source: Option<PathBuf>,

    /// Read raw RGB24 frames from standard input instead.
    #[arg(long, conflicts_with = "source")]
    pub stdin: bool,

    /// Frame width for `--stdin`.
    #[arg(long)]
    pub width: Option<usize>,

    /// Frame height for `--stdin`.
    #[arg(long)]
    pub height: Option<usize>,

    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,

    #[command(flatten)]
    pub thresholds: Thresholds,

    /// A frame triggers recording when a detection scores at least this.
    #[arg(long, default_value_t = DEFAULT_CONF)]
    pub trigger: f64,

    #[arg(long, value_name = "DIR", default_value = "clips")]
    pub clip_dir: PathBuf,

    #[arg(long, value_name = "FILE", default_value = "events.jsonl")]
    pub event_log: PathBuf,

    /// Frames buffered between the reader and the detector.
    #[arg(long, default_value_t = 8)]
    pub buffer: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Number of scenes.
    #[arg(long, default_value_t = 100)]
    pub count: usize,

    /// Fraction of scenes listed in train.txt; the rest go to test.txt.
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,

    /// Scene side in pixels.
    #[arg(long, default_value_t = INPUT_SIDE)]
    pub size: usize,

    #[arg(long, default_value_t = 1)]
    pub min_objects: usize,

    #[arg(long, default_value_t = 4)]
    pub max_objects: usize,

    /// Smallest object side in pixels.
    #[arg(long, default_value_t = 48)]
    pub min_object_size: usize,

    /// Largest object side in pixels.
    #[arg(long, default_value_t = 128)]
    pub max_object_size: usize,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    /// Timed forward passes per model.
    #[arg(long, default_value_t = 50)]
    pub reps: usize,

    /// Input image; a synthetic scene is used when absent.
    #[arg(long, value_name = "FILE")]
    pub image: Option<PathBuf>,

    /// Weights for the default model (random init otherwise).
    #[arg(long, value_name = "FILE")]
    pub default_checkpoint: Option<PathBuf>,

    /// Weights for the improved model (random init otherwise).
    #[arg(long, value_name = "FILE")]
    pub improved_checkpoint: Option<PathBuf>,
}
