//! Central finite-difference checks in double precision.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use trashwatch::detector::{detection_loss, encode_targets, loss_gradient, BBox, HeadLayout, LossWeights};
use trashwatch::netcore::{Activation, Conv2d, MaxPool2d, Tensor};

pub const STEP: f64 = 1e-3;
pub const REL_TOL: f64 = 1e-4;
/// Denominator floor so gradients that are exactly zero compare on an
/// absolute scale.
const FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default)]
pub struct GradStats {
    pub checked: usize,
    /// Instances redrawn because a kink lay within one step.
    pub redrawn: usize,
    pub worst: f64,
}

impl GradStats {
    fn record(&mut self, analytic: f64, numeric: f64) {
        let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR);
        self.worst = self.worst.max(rel);
        self.checked += 1;
    }

    pub fn passed(&self) -> bool {
        self.checked > 0 && self.worst < REL_TOL
    }

    pub fn merge(&mut self, o: GradStats) {
        self.checked += o.checked;
        self.redrawn += o.redrawn;
        self.worst = self.worst.max(o.worst);
    }
}

fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

fn random_tensor(rng: &mut impl Rng, shape: &[usize], lo: f64, hi: f64) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

fn dot(a: &Tensor<f64>, b: &Tensor<f64>) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

/// Numeric derivative of `f` with respect to element `i` of `x`: central
/// differences at `STEP` and `STEP / 2` combined by Richardson
/// extrapolation. A single central difference at `STEP` carries a
/// truncation error of `STEP^2 / 6` times the third derivative, which on the
/// square-root size terms of the loss is already above the tolerance.
fn central(x: &mut Tensor<f64>, i: usize, mut f: impl FnMut(&Tensor<f64>) -> f64) -> f64 {
    let orig = x.data()[i];
    let mut diff = |h: f64| {
        x.data_mut()[i] = orig + h;
        let up = f(x);
        x.data_mut()[i] = orig - h;
        let down = f(x);
        x.data_mut()[i] = orig;
        (up - down) / (2.0 * h)
    };
    let coarse = diff(STEP);
    let fine = diff(STEP / 2.0);
    (4.0 * fine - coarse) / 3.0
}

/// Input, weight and bias gradients of a random conv against differences
/// of `sum(upstream * conv(x))`. Seed 0 is the 1×2×5×5, 3×3, pad 1 case.
pub fn check_conv(seed: u64) -> GradStats {
    let mut r = rng(seed);
    let (n, cin, cout, k, stride, pad, h, w) = if seed == 0 {
        (1, 2, 1, 3, 1, 1, 5, 5)
    } else {
        let k = r.gen_range(1..=3);
        (
            r.gen_range(1..=2),
            r.gen_range(1..=3),
            r.gen_range(1..=3),
            k,
            r.gen_range(1..=2),
            r.gen_range(0..=1),
            r.gen_range(k..=6),
            r.gen_range(k..=6),
        )
    };
    let mut x = random_tensor(&mut r, &[n, cin, h, w], -1.0, 1.0);
    let mut weight = random_tensor(&mut r, &[cout, cin, k, k], -1.0, 1.0);
    let mut bias = random_tensor(&mut r, &[cout], -1.0, 1.0);
    let conv = Conv2d::from_weights(weight.clone(), bias.clone(), stride, pad).unwrap();
    let up = random_tensor(&mut r, &conv.forward(&x).unwrap().shape().to_vec(), -1.0, 1.0);
    let grads = conv.backward(&x, &up).unwrap();

    let mut stats = GradStats::default();
    for i in 0..x.len() {
        let num = central(&mut x, i, |x| dot(&up, &conv.forward(x).unwrap()));
        stats.record(grads.input.data()[i], num);
    }
    for i in 0..weight.len() {
        let num = central(&mut weight, i, |wt| {
            let c = Conv2d::from_weights(wt.clone(), bias.clone(), stride, pad).unwrap();
            dot(&up, &c.forward(&x).unwrap())
        });
        stats.record(grads.weight.data()[i], num);
    }
    let weight_now = weight.clone();
    for i in 0..bias.len() {
        let num = central(&mut bias, i, |b| {
            let c = Conv2d::from_weights(weight_now.clone(), b.clone(), stride, pad).unwrap();
            dot(&up, &c.forward(&x).unwrap())
        });
        stats.record(grads.bias.data()[i], num);
    }
    stats
}

/// 2×2/2 max-pool over inputs whose values are spaced well beyond one step,
/// so no perturbation changes a window's maximum.
pub fn check_maxpool(seed: u64) -> GradStats {
    let mut r = rng(seed);
    let (c, h, w) = (r.gen_range(1..=3), r.gen_range(2..=7), r.gen_range(2..=7));
    let n = c * h * w;
    let mut values: Vec<f64> = (0..n).map(|i| i as f64 * 0.05 - 1.0 + r.gen_range(0.0..0.01)).collect();
    values.shuffle(&mut r);
    let mut x = Tensor::from_vec(&[1, c, h, w], values).unwrap();
    let pool = MaxPool2d::new(2, 2);
    let up = random_tensor(&mut r, &pool.forward(&x).unwrap().shape().to_vec(), -1.0, 1.0);
    let grad = pool.backward(&x, &up).unwrap();
    let mut stats = GradStats::default();
    for i in 0..x.len() {
        let num = central(&mut x, i, |x| dot(&up, &pool.forward(x).unwrap()));
        stats.record(grad.data()[i], num);
    }
    stats
}

/// Elementwise activation; piecewise-linear ones are sampled away from 0.
pub fn check_activation(act: Activation, seed: u64) -> GradStats {
    let mut r = rng(seed);
    let n = 64;
    let values: Vec<f64> = (0..n)
        .map(|_| match act {
            Activation::Relu | Activation::LeakyRelu => {
                let mag = r.gen_range(0.01..3.0);
                if r.gen_bool(0.5) {
                    mag
                } else {
                    -mag
                }
            }
            _ => r.gen_range(-6.0..6.0),
        })
        .collect();
    let mut x = Tensor::from_vec(&[1, 1, 8, 8], values).unwrap();
    let up = random_tensor(&mut r, &[1, 1, 8, 8], -1.0, 1.0);
    let grad = act.backward(&x, &up).unwrap();
    let mut stats = GradStats::default();
    for i in 0..n {
        let num = central(&mut x, i, |x| dot(&up, &act.forward(x)));
        stats.record(grad.data()[i], num);
    }
    stats
}

/// True when a predicted box edge lies within one step of a ground-truth
/// edge on the same axis; the IoU has a kink there.
fn near_kink(layout: &HeadLayout, head: &[f64], gt: &[BBox]) -> bool {
    let g = layout.grid as f64;
    for t in gt {
        let (row, col) = layout.cell_of(t.cx, t.cy);
        for b in 0..layout.boxes {
            let at = |k| head[layout.index(b, k, row, col)];
            let (cx, cy) = ((col as f64 + at(0)) / g, (row as f64 + at(1)) / g);
            let edges = |c: f64, s: f64| [c - s / 2.0, c + s / 2.0];
            for (p, q) in [(edges(cx, at(2)), edges(t.cx, t.w)), (edges(cy, at(3)), edges(t.cy, t.h))] {
                if p.iter().any(|&e| q.iter().any(|&f| (e - f).abs() < 2.0 * STEP)) {
                    return true;
                }
            }
        }
    }
    false
}

/// Total loss gradient on a random head, alternating frozen and live
/// confidence targets. Head values stay inside (0.1, 0.95), as a logistic
/// head's would, away from the square root's singularity at 0.
pub fn check_loss(seed: u64) -> GradStats {
    let mut r = rng(seed);
    let mut stats = GradStats::default();
    loop {
        let layout = HeadLayout::new(r.gen_range(2..=4), r.gen_range(1..=3), r.gen_range(1..=3));
        let mut head = random_tensor(&mut r, &layout.shape(), 0.1, 0.95);
        let gt: Vec<BBox> = (0..r.gen_range(1..=4))
            .map(|_| {
                BBox::new(
                    r.gen_range(0.05..0.95),
                    r.gen_range(0.05..0.95),
                    r.gen_range(0.1..0.6),
                    r.gen_range(0.1..0.6),
                    r.gen_range(0..layout.num_classes),
                )
            })
            .collect();
        if near_kink(&layout, head.data(), &gt) {
            stats.redrawn += 1;
            continue;
        }
        let frozen = seed % 2 == 0;
        let target = encode_targets(&gt, layout, frozen.then_some(&head)).unwrap();
        let weights = LossWeights::default();
        let grad = loss_gradient(&head, &target, weights).unwrap();
        for i in 0..head.len() {
            let num = central(&mut head, i, |h| detection_loss(h, &target, weights).unwrap().total);
            stats.record(grad.data()[i], num);
        }
        return stats;
    }
}
