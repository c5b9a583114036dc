use super::{BBox, DetectError, GridTarget, BOX_FIELDS};
use crate::netcore::{Scalar, Tensor};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LossWeights {
    pub lambda_coord: f64,
    pub lambda_noobj: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_coord: 5.0,
            lambda_noobj: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LossBreakdown {
    pub coord_err: f64,
    /// Confidence terms, both object and no-object.
    pub iou_err: f64,
    pub cls_err: f64,
    pub total: f64,
}

impl LossBreakdown {
    fn finish(mut self) -> Self {
        self.total = self.coord_err + self.iou_err + self.cls_err;
        self
    }
}

impl std::ops::AddAssign for LossBreakdown {
    fn add_assign(&mut self, o: Self) {
        self.coord_err += o.coord_err;
        self.iou_err += o.iou_err;
        self.cls_err += o.cls_err;
        self.total += o.total;
    }
}

pub fn detection_loss<T: Scalar>(
    pred: &Tensor<T>,
    target: &GridTarget,
    weights: LossWeights,
) -> Result<LossBreakdown, DetectError> {
    evaluate(pred, target, weights, false).map(|(l, _)| l)
}

pub fn loss_gradient<T: Scalar>(
    pred: &Tensor<T>,
    target: &GridTarget,
    weights: LossWeights,
) -> Result<Tensor<T>, DetectError> {
    loss_and_gradient(pred, target, weights).map(|(_, g)| g)
}

/// Loss and its gradient with respect to the head output, shaped like `pred`.
pub fn loss_and_gradient<T: Scalar>(
    pred: &Tensor<T>,
    target: &GridTarget,
    weights: LossWeights,
) -> Result<(LossBreakdown, Tensor<T>), DetectError> {
    let (loss, grad) = evaluate(pred, target, weights, true)?;
    let grad = grad.expect("gradient requested");
    let data = grad.into_iter().map(T::from_f64_lossy).collect();
    let tensor = Tensor::from_vec(pred.shape(), data).expect("shape matches prediction");
    Ok((loss, tensor))
}

fn evaluate<T: Scalar>(
    pred: &Tensor<T>,
    target: &GridTarget,
    weights: LossWeights,
    want_grad: bool,
) -> Result<(LossBreakdown, Option<Vec<f64>>), DetectError> {
    let layout = *target.layout();
    let head = layout.check(pred)?;
    let at = |i: usize| head[i].to_f64_lossy();
    let mut grad = want_grad.then(|| vec![0.0; layout.len()]);
    let mut loss = LossBreakdown::default();
    let (lc, ln) = (weights.lambda_coord, weights.lambda_noobj);

    for row in 0..layout.grid {
        for col in 0..layout.grid {
            for b in 0..layout.boxes {
                let idx = |k| layout.index(b, k, row, col);
                let conf = at(idx(4));
                let t = target.get(row, col, b);
                if !t.responsible {
                    loss.iou_err += ln * conf * conf;
                    if let Some(g) = grad.as_mut() {
                        g[idx(4)] += 2.0 * ln * conf;
                    }
                    continue;
                }

                let (x, y, w, h) = (at(idx(0)), at(idx(1)), at(idx(2)), at(idx(3)));
                let (sw, sh) = (w.max(0.0).sqrt(), h.max(0.0).sqrt());
                let (stw, sth) = (t.tw.sqrt(), t.th.sqrt());
                loss.coord_err += lc * ((t.tx - x).powi(2) + (t.ty - y).powi(2));
                loss.coord_err += lc * ((stw - sw).powi(2) + (sth - sh).powi(2));

                let gt = t.gt_box(&layout, row, col);
                let live = t.conf_target.is_none();
                let (c_target, d_iou) = match t.conf_target {
                    Some(c) => (c, [0.0; 4]),
                    None => iou_with_grad(&layout.pred_box(head, b, row, col), &gt, layout.grid as f64),
                };
                loss.iou_err += (c_target - conf).powi(2);

                for c in 0..layout.num_classes {
                    let p = at(idx(BOX_FIELDS + c));
                    let want = if c == t.class_id { 1.0 } else { 0.0 };
                    loss.cls_err += (want - p).powi(2);
                    if let Some(g) = grad.as_mut() {
                        g[idx(BOX_FIELDS + c)] += 2.0 * (p - want);
                    }
                }

                if let Some(g) = grad.as_mut() {
                    g[idx(0)] += 2.0 * lc * (x - t.tx);
                    g[idx(1)] += 2.0 * lc * (y - t.ty);
                    if w > 0.0 {
                        g[idx(2)] += lc * (sw - stw) / sw;
                    }
                    if h > 0.0 {
                        g[idx(3)] += lc * (sh - sth) / sh;
                    }
                    g[idx(4)] += 2.0 * (conf - c_target);
                    if live {
                        let outer = 2.0 * (c_target - conf);
                        for (k, d) in d_iou.iter().enumerate() {
                            g[idx(k)] += outer * d;
                        }
                    }
                }
            }
        }
    }
    Ok((loss.finish(), grad))
}

/// IoU of a predicted box against `gt` and its derivative with respect to the
/// raw head fields `(tx, ty, w, h)` of the prediction. The prediction's
/// center is `(cell + t) / grid`, so center derivatives carry `1 / grid`.
fn iou_with_grad(pred: &BBox, gt: &BBox, grid: f64) -> (f64, [f64; 4]) {
    // Per axis: overlap length and its derivatives w.r.t. center and size.
    fn axis(c: f64, s: f64, gc: f64, gs: f64) -> (f64, f64, f64) {
        let (lo, hi) = (c - s / 2.0, c + s / 2.0);
        let (glo, ghi) = (gc - gs / 2.0, gc + gs / 2.0);
        let len = hi.min(ghi) - lo.max(glo);
        if len <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let hi_from_pred = if hi < ghi { 1.0 } else { 0.0 };
        let lo_from_pred = if lo > glo { 1.0 } else { 0.0 };
        (len, hi_from_pred - lo_from_pred, 0.5 * (hi_from_pred + lo_from_pred))
    }
    let (ix, dix_dc, dix_ds) = axis(pred.cx, pred.w, gt.cx, gt.w);
    let (iy, diy_dc, diy_ds) = axis(pred.cy, pred.h, gt.cy, gt.h);
    let inter = ix * iy;
    let union = pred.w * pred.h + gt.w * gt.h - inter;
    if union <= 0.0 {
        return (0.0, [0.0; 4]);
    }
    // d(inter) w.r.t. (cx, cy, w, h) and d(pred area) likewise.
    let d_inter = [iy * dix_dc, ix * diy_dc, iy * dix_ds, ix * diy_ds];
    let d_area = [0.0, 0.0, pred.h, pred.w];
    let chain = [1.0 / grid, 1.0 / grid, 1.0, 1.0];
    let mut d = [0.0; 4];
    for k in 0..4 {
        let d_union = d_area[k] - d_inter[k];
        d[k] = (d_inter[k] * union - inter * d_union) / (union * union) * chain[k];
    }
    // Sizes clamped at zero carry no gradient.
    if pred.w <= 0.0 {
        d[2] = 0.0;
    }
    if pred.h <= 0.0 {
        d[3] = 0.0;
    }
    (inter / union, d)
}
