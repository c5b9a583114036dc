use super::{iou, BBox, DetectError, Detection, BOX_FIELDS};
use crate::netcore::{Scalar, Tensor};

/// Geometry of a detection head: `boxes * (num_classes + 5)` channels over a
/// `grid x grid` map. Channel order per box is `tx, ty, w, h, conf, p_0..`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HeadLayout {
    pub grid: usize,
    pub boxes: usize,
    pub num_classes: usize,
}

impl HeadLayout {
    pub fn new(grid: usize, boxes: usize, num_classes: usize) -> Self {
        Self {
            grid,
            boxes,
            num_classes,
        }
    }

    pub fn fields(&self) -> usize {
        BOX_FIELDS + self.num_classes
    }

    pub fn channels(&self) -> usize {
        self.boxes * self.fields()
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.channels(), self.grid, self.grid]
    }

    pub fn len(&self) -> usize {
        self.channels() * self.grid * self.grid
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Flat index of field `k` of box slot `b` in cell (`row`, `col`).
    #[inline]
    pub fn index(&self, b: usize, k: usize, row: usize, col: usize) -> usize {
        ((b * self.fields() + k) * self.grid + row) * self.grid + col
    }

    /// Cell containing a normalized center, clamped to the last cell.
    pub fn cell_of(&self, cx: f64, cy: f64) -> (usize, usize) {
        let g = self.grid as f64;
        let clamp = |v: f64| ((v * g).floor().max(0.0) as usize).min(self.grid - 1);
        (clamp(cy), clamp(cx))
    }

    /// Accepts `[C, G, G]` or `[1, C, G, G]` and returns the flat data.
    pub fn check<'a, T: Scalar>(&self, pred: &'a Tensor<T>) -> Result<&'a [T], DetectError> {
        let expected = self.shape();
        let shape = pred.shape();
        let ok = match shape.len() {
            3 => shape == expected,
            4 => shape[0] == 1 && shape[1..] == expected,
            _ => false,
        };
        if !ok {
            return Err(DetectError::ShapeMismatch {
                expected: expected.to_vec(),
                got: shape.to_vec(),
            });
        }
        Ok(pred.data())
    }

    /// Predicted box of slot `b` in cell (`row`, `col`), with sizes clamped at 0.
    pub(crate) fn pred_box<T: Scalar>(&self, head: &[T], b: usize, row: usize, col: usize) -> BBox {
        let at = |k| head[self.index(b, k, row, col)].to_f64_lossy();
        let g = self.grid as f64;
        BBox::new(
            (col as f64 + at(0)) / g,
            (row as f64 + at(1)) / g,
            at(2).max(0.0),
            at(3).max(0.0),
            0,
        )
    }
}

/// Training target of one cell-box slot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CellTarget {
    pub responsible: bool,
    pub tx: f64,
    pub ty: f64,
    pub tw: f64,
    pub th: f64,
    pub class_id: usize,
    /// Confidence target frozen at encode time. `None` means the loss uses
    /// the live IoU of the prediction against the ground-truth box.
    pub conf_target: Option<f64>,
}

impl CellTarget {
    /// Ground-truth box in normalized image coordinates.
    pub fn gt_box(&self, layout: &HeadLayout, row: usize, col: usize) -> BBox {
        let g = layout.grid as f64;
        BBox::new(
            (col as f64 + self.tx) / g,
            (row as f64 + self.ty) / g,
            self.tw,
            self.th,
            self.class_id,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridTarget {
    layout: HeadLayout,
    /// Indexed `(row * grid + col) * boxes + b`.
    cells: Vec<CellTarget>,
}

impl GridTarget {
    pub fn empty(layout: HeadLayout) -> Self {
        Self {
            layout,
            cells: vec![CellTarget::default(); layout.grid * layout.grid * layout.boxes],
        }
    }

    pub fn layout(&self) -> &HeadLayout {
        &self.layout
    }

    pub fn get(&self, row: usize, col: usize, b: usize) -> &CellTarget {
        &self.cells[(row * self.layout.grid + col) * self.layout.boxes + b]
    }

    fn get_mut(&mut self, row: usize, col: usize, b: usize) -> &mut CellTarget {
        &mut self.cells[(row * self.layout.grid + col) * self.layout.boxes + b]
    }

    pub fn responsible_count(&self) -> usize {
        self.cells.iter().filter(|c| c.responsible).count()
    }

    /// All responsible slots as `(row, col, b, target)`.
    pub fn responsible(&self) -> impl Iterator<Item = (usize, usize, usize, &CellTarget)> + '_ {
        let (g, nb) = (self.layout.grid, self.layout.boxes);
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.responsible)
            .map(move |(i, c)| (i / (g * nb), (i / nb) % g, i % nb, c))
    }
}

/// Assigns each ground-truth box to the cell containing its center.
///
/// With `pred`, the responsible slot is the free slot whose predicted box
/// overlaps the ground truth most (ties to the lowest slot) and the
/// confidence target is frozen at that IoU. Without it, slots fill in order
/// and the loss computes the IoU target live. Boxes beyond `boxes` per cell
/// are dropped with a warning.
pub fn encode_targets<T: Scalar>(
    ground_truth: &[BBox],
    layout: HeadLayout,
    pred: Option<&Tensor<T>>,
) -> Result<GridTarget, DetectError> {
    let head = pred.map(|p| layout.check(p)).transpose()?;
    let mut target = GridTarget::empty(layout);
    for gt in ground_truth {
        gt.validate(layout.num_classes)?;
        let (row, col) = layout.cell_of(gt.cx, gt.cy);
        let g = layout.grid as f64;
        let mut best: Option<(usize, f64)> = None;
        for b in 0..layout.boxes {
            if target.get(row, col, b).responsible {
                continue;
            }
            let overlap = head.map_or(0.0, |h| iou(&layout.pred_box(h, b, row, col), gt));
            if best.map_or(true, |(_, o)| overlap > o) {
                best = Some((b, overlap));
            }
        }
        let Some((b, overlap)) = best else {
            log::warn!(
                "more than {} objects centered in cell ({row}, {col}); dropping box at ({:.4}, {:.4})",
                layout.boxes,
                gt.cx,
                gt.cy
            );
            continue;
        };
        *target.get_mut(row, col, b) = CellTarget {
            responsible: true,
            tx: gt.cx * g - col as f64,
            ty: gt.cy * g - row as f64,
            tw: gt.w,
            th: gt.h,
            class_id: gt.class_id,
            conf_target: head.map(|_| overlap),
        };
    }
    Ok(target)
}

/// Builds the head tensor a perfect network would emit for `boxes`:
/// responsible slots carry the box geometry, its confidence (1 when absent)
/// and a one-hot class; everything else is 0.
pub fn encode_as_head(boxes: &[BBox], layout: HeadLayout) -> Result<Tensor<f64>, DetectError> {
    let mut used = GridTarget::empty(layout);
    let mut head = vec![0.0; layout.len()];
    let g = layout.grid as f64;
    for gt in boxes {
        gt.validate(layout.num_classes)?;
        let (row, col) = layout.cell_of(gt.cx, gt.cy);
        let Some(b) = (0..layout.boxes).find(|&b| !used.get(row, col, b).responsible) else {
            continue;
        };
        used.get_mut(row, col, b).responsible = true;
        let fields = [
            gt.cx * g - col as f64,
            gt.cy * g - row as f64,
            gt.w,
            gt.h,
            gt.confidence.unwrap_or(1.0),
        ];
        for (k, v) in fields.into_iter().enumerate() {
            head[layout.index(b, k, row, col)] = v;
        }
        head[layout.index(b, BOX_FIELDS + gt.class_id, row, col)] = 1.0;
    }
    Tensor::from_vec(&layout.shape(), head).map_err(|e| DetectError::InvalidBox(e.to_string()))
}

/// Turns a head tensor into scored boxes. Score is objectness times the best
/// class probability; boxes scoring below `conf_threshold` are dropped.
pub fn decode<T: Scalar>(
    pred: &Tensor<T>,
    layout: HeadLayout,
    conf_threshold: f64,
) -> Result<Vec<Detection>, DetectError> {
    let head = layout.check(pred)?;
    let mut out = Vec::new();
    for row in 0..layout.grid {
        for col in 0..layout.grid {
            for b in 0..layout.boxes {
                let at = |k| head[layout.index(b, k, row, col)].to_f64_lossy();
                let (mut class_id, mut best) = (0, f64::NEG_INFINITY);
                for c in 0..layout.num_classes {
                    let p = at(BOX_FIELDS + c);
                    if p > best {
                        best = p;
                        class_id = c;
                    }
                }
                let conf = at(4);
                let score = conf * best;
                if !(score >= conf_threshold) {
                    continue;
                }
                let mut bbox = layout.pred_box(head, b, row, col);
                bbox.class_id = class_id;
                bbox.confidence = Some(conf);
                out.push(Detection { bbox, score });
            }
        }
    }
    Ok(out)
}
