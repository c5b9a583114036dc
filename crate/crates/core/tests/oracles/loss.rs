//! The sum-squared detection loss written as plain loops over
//! cells and boxes, sharing nothing with the library but the target type.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use trashwatch::detector::{detection_loss, encode_targets, BBox, GridTarget, HeadLayout, LossWeights};
use trashwatch::netcore::Tensor;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NaiveLoss {
    pub coord: f64,
    pub conf: f64,
    pub class: f64,
}

impl NaiveLoss {
    pub fn total(&self) -> f64 {
        self.coord + self.conf + self.class
    }
}

fn corner_iou(a: [f64; 4], b: [f64; 4]) -> f64 {
    let ix = (a[2].min(b[2]) - a[0].max(b[0])).max(0.0);
    let iy = (a[3].min(b[3]) - a[1].max(b[1])).max(0.0);
    let inter = ix * iy;
    let union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter;
    if union > 0.0 {
        inter / union
    } else {
        0.0
    }
}

/// `head` is channel-major `[B * (5 + C), G, G]`; per box the channels are
/// x offset, y offset, width, height, confidence, then class scores.
pub fn naive_loss(head: &[f64], g: usize, b_count: usize, classes: usize, target: &GridTarget, w: LossWeights) -> NaiveLoss {
    let fields = 5 + classes;
    let value = |b: usize, k: usize, i: usize, j: usize| head[(b * fields + k) * g * g + i * g + j];
    let mut out = NaiveLoss::default();
    for i in 0..g {
        for j in 0..g {
            for b in 0..b_count {
                let t = target.get(i, j, b);
                let c_hat = value(b, 4, i, j);
                if !t.responsible {
                    out.conf += w.lambda_noobj * c_hat * c_hat;
                    continue;
                }
                let (x, y) = (value(b, 0, i, j), value(b, 1, i, j));
                let (pw, ph) = (value(b, 2, i, j).max(0.0), value(b, 3, i, j).max(0.0));
                out.coord += w.lambda_coord * ((t.tx - x).powi(2) + (t.ty - y).powi(2));
                out.coord += w.lambda_coord * ((t.tw.sqrt() - pw.sqrt()).powi(2) + (t.th.sqrt() - ph.sqrt()).powi(2));

                let c = match t.conf_target {
                    Some(c) => c,
                    None => {
                        let gf = g as f64;
                        let (pcx, pcy) = ((j as f64 + x) / gf, (i as f64 + y) / gf);
                        let (gcx, gcy) = ((j as f64 + t.tx) / gf, (i as f64 + t.ty) / gf);
                        corner_iou(
                            [pcx - pw / 2.0, pcy - ph / 2.0, pcx + pw / 2.0, pcy + ph / 2.0],
                            [gcx - t.tw / 2.0, gcy - t.th / 2.0, gcx + t.tw / 2.0, gcy + t.th / 2.0],
                        )
                    }
                };
                out.conf += (c - c_hat).powi(2);
                for k in 0..classes {
                    let p = value(b, 5 + k, i, j);
                    let want = if k == t.class_id { 1.0 } else { 0.0 };
                    out.class += (p - want).powi(2);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LossOracleStats {
    pub instances: usize,
    pub worst_abs: f64,
    pub additivity_failures: usize,
}

/// One random instance: head values in [-0.1, 1.1) so size clamping is
/// exercised, up to 8 boxes, frozen or live confidence targets.
pub fn loss_instance(seed: u64, g: usize, b: usize) -> (f64, bool) {
    let mut r = Xoshiro256PlusPlus::seed_from_u64(seed);
    let classes = r.gen_range(1..=8);
    let layout = HeadLayout::new(g, b, classes);
    let head: Vec<f64> = (0..layout.len()).map(|_| r.gen_range(-0.1..1.1)).collect();
    let pred = Tensor::from_vec(&layout.shape(), head.clone()).unwrap();
    let gt: Vec<BBox> = (0..r.gen_range(0..=8))
        .map(|_| {
            BBox::new(
                r.gen_range(0.0..1.0),
                r.gen_range(0.0..1.0),
                r.gen_range(0.01..1.0),
                r.gen_range(0.01..1.0),
                r.gen_range(0..classes),
            )
        })
        .collect();
    let frozen = r.gen_bool(0.5);
    let target = encode_targets(&gt, layout, frozen.then_some(&pred)).unwrap();
    let weights = LossWeights {
        lambda_coord: r.gen_range(0.5..10.0),
        lambda_noobj: r.gen_range(0.1..1.0),
    };
    let lib = detection_loss(&pred, &target, weights).unwrap();
    let naive = naive_loss(&head, g, b, classes, &target, weights);
    let diff = [
        (lib.coord_err - naive.coord).abs(),
        (lib.iou_err - naive.conf).abs(),
        (lib.cls_err - naive.class).abs(),
        (lib.total - naive.total()).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let additive = (lib.total - (lib.coord_err + lib.iou_err + lib.cls_err)).abs() <= 1e-12 * lib.total.abs().max(1.0);
    (diff, additive)
}

/// `count` instances spread over G in {2, 13} and B in {1, 5}.
pub fn run_loss_oracle(count: usize) -> LossOracleStats {
    let mut s = LossOracleStats::default();
    for i in 0..count {
        let (g, b) = [(2, 1), (2, 5), (13, 1), (13, 5)][i % 4];
        let (diff, additive) = loss_instance(i as u64, g, b);
        s.instances += 1;
        s.worst_abs = s.worst_abs.max(diff);
        if !additive {
            s.additivity_failures += 1;
        }
    }
    s
}
