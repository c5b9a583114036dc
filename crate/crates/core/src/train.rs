use crate::data::{augment_hsv, epoch_order, resize_bilinear, sample_rng, Image, Sample};
use crate::detector::{encode_targets, loss_and_gradient, BBox, HeadLayout, LossBreakdown, LossWeights};
use crate::infer::{evaluate, layout_of, Detector};
use crate::netcore::checkpoint::{final_path, periodic_path};
use crate::netcore::{flush_denormals, save_checkpoint, sgd_step, GradientAccumulator, Network, Tensor, TrainConfig};
use crate::Error;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, Ordering};

/// Header of the training log.
pub const LOG_HEADER: &str = "iteration,total,coordErr,iouErr,clsErr,mAP";

/// Owns the network being trained and the preprocessed training images.
///
/// Which samples make up a batch, and how each is augmented, is a pure
/// function of `(seed, iteration)`, so a run resumed from a checkpoint
/// follows the same trajectory as one that never stopped.
pub struct Trainer {
    net: Network<f32>,
    cfg: TrainConfig,
    weights: LossWeights,
    layout: HeadLayout,
    iteration: u64,
    images: Vec<Image>,
    boxes: Vec<Vec<BBox>>,
}

impl Trainer {
    pub fn new(net: Network<f32>, cfg: TrainConfig, samples: &[Sample], iteration: u64) -> Result<Self, Error> {
        cfg.validate()?;
        if samples.is_empty() {
            return Err(Error::Invalid("training split is empty".into()));
        }
        let [_, h, w] = net.input_shape();
        let layout = layout_of(&net);
        for s in samples {
            for b in &s.annotation.boxes {
                b.validate(layout.num_classes)?;
            }
        }
        Ok(Self {
            weights: LossWeights {
                lambda_coord: cfg.lambda_coord,
                lambda_noobj: cfg.lambda_noobj,
            },
            images: samples.iter().map(|s| resize_bilinear(&s.image, w, h)).collect(),
            boxes: samples.iter().map(|s| s.annotation.boxes.clone()).collect(),
            net,
            cfg,
            layout,
            iteration,
        })
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn config(&self) -> &TrainConfig {
        &self.cfg
    }

    pub fn network(&self) -> &Network<f32> {
        &self.net
    }

    pub fn into_network(self) -> Network<f32> {
        self.net
    }

    /// Sample indices of the batch for `iteration`: consecutive positions in
    /// a stream of per-epoch shuffles.
    pub fn batch_indices(&self, iteration: u64) -> Vec<usize> {
        let n = self.images.len() as u64;
        let b = self.cfg.batch_size as u64;
        let mut cached: Option<(u64, Vec<usize>)> = None;
        (0..b)
            .map(|k| {
                let pos = iteration * b + k;
                let epoch = pos / n;
                if cached.as_ref().map_or(true, |c| c.0 != epoch) {
                    cached = Some((epoch, epoch_order(self.cfg.seed, epoch, n as usize)));
                }
                cached.as_ref().expect("just filled").1[(pos % n) as usize]
            })
            .collect()
    }

    /// One optimizer step over one batch. Returns the summed loss.
    pub fn step(&mut self) -> Result<LossBreakdown, Error> {
        flush_denormals();
        let indices = self.batch_indices(self.iteration);
        let mut acc = GradientAccumulator::from_config(&self.cfg)?;
        let mut total = LossBreakdown::default();
        let [c, h, w] = self.net.input_shape();
        for (s, slice) in indices.chunks(acc.slice_size()).enumerate() {
            let mut data = Vec::with_capacity(slice.len() * c * h * w);
            for (k, &i) in slice.iter().enumerate() {
                let slot = (s * acc.slice_size() + k) as u64;
                let img = if self.cfg.augment {
                    let mut rng = sample_rng(self.cfg.seed, self.iteration, slot);
                    augment_hsv(&self.images[i], &self.cfg, &mut rng)
                } else {
                    self.images[i].clone()
                };
                data.extend(img.to_tensor::<f32>().into_vec());
            }
            let input = Tensor::from_vec(&[slice.len(), c, h, w], data)?;
            let (layout, weights, boxes) = (self.layout, self.weights, &self.boxes);
            acc.accumulate(&mut self.net, &input, |out: &Tensor<f32>| {
                let mut grad = Vec::with_capacity(out.len());
                let mut sum = 0.0;
                for (k, &i) in slice.iter().enumerate() {
                    let head = Tensor::from_vec(&layout.shape(), out.sample(k).to_vec())?;
                    let target = encode_targets(&boxes[i], layout, Some(&head))?;
                    let (l, g) = loss_and_gradient(&head, &target, weights)?;
                    total += l;
                    sum += l.total;
                    grad.extend(g.into_vec());
                }
                Ok::<_, Error>((sum, Tensor::from_vec(out.shape(), grad)?))
            })?;
        }
        let cfg = TrainConfig {
            learning_rate: self.cfg.learning_rate_at(self.iteration),
            ..self.cfg.clone()
        };
        sgd_step(&mut self.net, &mut acc, &cfg)?;
        self.iteration += 1;
        Ok(total)
    }
}

/// One line of the training log. Losses are per-image means over the batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub iteration: u64,
    pub loss: LossBreakdown,
    pub map: Option<f64>,
}

impl LogRow {
    pub fn to_csv(&self) -> String {
        let l = &self.loss;
        let map = self.map.map(|m| format!("{m:.4}")).unwrap_or_default();
        format!(
            "{},{:.6},{:.6},{:.6},{:.6},{map}",
            self.iteration, l.total, l.coord_err, l.iou_err, l.cls_err
        )
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Evaluate on the held-out samples every this many iterations (0: never).
    pub eval_every: u64,
    /// Score threshold for decoding during periodic evaluation.
    pub eval_conf: f64,
    /// Stop as soon as a periodic evaluation reaches this mAP (percent).
    pub stop_at_map: Option<f64>,
}

impl RunOptions {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            eval_every: 0,
            eval_conf: EVAL_CONF,
            stop_at_map: None,
        }
    }
}

/// Low score threshold used when computing precision-recall curves.
pub const EVAL_CONF: f64 = 0.005;

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub iteration: u64,
    pub last: Option<LogRow>,
    pub last_map: Option<f64>,
    pub interrupted: bool,
    pub final_checkpoint: PathBuf,
}

/// Trains until `iterations` steps have been taken in total, `stop` is set
/// or the mAP target is met. Appends to `train_log.csv` in the output
/// directory, writes periodic checkpoints and always a final one.
pub fn run_training(
    trainer: &mut Trainer,
    iterations: u64,
    opts: &RunOptions,
    eval_set: &[Sample],
    stop: &AtomicBool,
    mut on_row: impl FnMut(&LogRow),
) -> Result<RunSummary, Error> {
    let dir = &opts.out_dir;
    std::fs::create_dir_all(dir).map_err(Error::io(format!("creating {}", dir.display())))?;
    let log_path = dir.join("train_log.csv");
    let mut log = open_log(&log_path, trainer.iteration() > 0)?;
    let every = trainer.config().checkpoint_every;
    let batch = trainer.config().batch_size as f64;
    let mut summary = RunSummary {
        iteration: trainer.iteration(),
        last: None,
        last_map: None,
        interrupted: false,
        final_checkpoint: final_path(dir),
    };
    while trainer.iteration() < iterations {
        if stop.load(Ordering::SeqCst) {
            summary.interrupted = true;
            break;
        }
        let sum = trainer.step()?;
        let it = trainer.iteration();
        let mut row = LogRow {
            iteration: it,
            loss: LossBreakdown {
                coord_err: sum.coord_err / batch,
                iou_err: sum.iou_err / batch,
                cls_err: sum.cls_err / batch,
                total: sum.total / batch,
            },
            map: None,
        };
        if !row.loss.total.is_finite() {
            return Err(Error::Invalid(format!("loss diverged at iteration {it}")));
        }
        if opts.eval_every > 0 && it % opts.eval_every == 0 && !eval_set.is_empty() {
            let mut det = Detector::new(trainer.network().clone());
            det.conf_threshold = opts.eval_conf;
            row.map = Some(evaluate(&det, eval_set, 0.5)?.map().unwrap_or(0.0));
            summary.last_map = row.map;
        }
        writeln!(log, "{}", row.to_csv()).map_err(Error::io(format!("writing {}", log_path.display())))?;
        log.flush().map_err(Error::io(format!("writing {}", log_path.display())))?;
        on_row(&row);
        summary.last = Some(row);
        if every > 0 && it % every == 0 {
            save_checkpoint(trainer.network(), it, &periodic_path(dir, it))?;
        }
        if let (Some(target), Some(m)) = (opts.stop_at_map, row.map) {
            if m >= target {
                log::info!("mAP {m:.2} reached target {target} at iteration {it}");
                break;
            }
        }
    }
    summary.iteration = trainer.iteration();
    save_checkpoint(trainer.network(), trainer.iteration(), &summary.final_checkpoint)?;
    Ok(summary)
}

fn open_log(path: &Path, resuming: bool) -> Result<std::fs::File, Error> {
    let ctx = || format!("opening {}", path.display());
    if resuming && path.exists() {
        return std::fs::OpenOptions::new().append(true).open(path).map_err(Error::io(ctx()));
    }
    let mut f = std::fs::File::create(path).map_err(Error::io(ctx()))?;
    writeln!(f, "{LOG_HEADER}").map_err(Error::io(ctx()))?;
    Ok(f)
}
