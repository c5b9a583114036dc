use super::{Annotation, Image};
use crate::detector::BBox;
use rand::Rng;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    Square,
    Disk,
    Triangle,
    Ring,
    Cross,
    Diamond,
    Frame,
    Stripes,
}

impl ShapeKind {
    /// Whether pixel `(u, v)` of a `w x h` shape box is painted.
    fn covers(self, u: usize, v: usize, w: usize, h: usize) -> bool {
        // Pixel center in [-1, 1] box coordinates.
        let x = (2.0 * u as f64 + 1.0) / w as f64 - 1.0;
        let y = (2.0 * v as f64 + 1.0) / h as f64 - 1.0;
        let thick = |n: usize, d: usize| n * d.max(1) < n.max(1) * d;
        match self {
            ShapeKind::Square => true,
            ShapeKind::Disk => x * x + y * y <= 1.0 || is_mid(u, w) || is_mid(v, h),
            ShapeKind::Triangle => x.abs() <= ((v + 1) as f64 / h as f64).max(1.0 / w as f64 * 2.0),
            ShapeKind::Ring => {
                let r = x * x + y * y;
                (r <= 1.0 || is_mid(u, w) || is_mid(v, h)) && r >= 0.36
            }
            ShapeKind::Cross => x.abs() <= 1.0 / 3.0 || y.abs() <= 1.0 / 3.0,
            ShapeKind::Diamond => x.abs() + y.abs() <= 1.0 || is_mid(u, w) || is_mid(v, h),
            ShapeKind::Frame => {
                let t = |n: usize, d: usize| thick(n, 4 * d);
                t(u, w) || t(w - 1 - u, w) || t(v, h) || t(h - 1 - v, h)
            }
            ShapeKind::Stripes => ((y + 1.0) * 2.5).floor() as i64 % 2 == 0,
        }
    }
}

/// Middle row or column: keeps round shapes touching all four box edges.
fn is_mid(i: usize, n: usize) -> bool {
    i == (n - 1) / 2 || i == n / 2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassStyle {
    pub shape: ShapeKind,
    pub color: [u8; 3],
}

/// Parameters of the scene generator. Sizes are in pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneSpec {
    pub width: usize,
    pub height: usize,
    pub styles: Vec<ClassStyle>,
    pub min_objects: usize,
    pub max_objects: usize,
    pub min_size: usize,
    pub max_size: usize,
    /// Placement attempts per object before giving up on it.
    pub max_retries: usize,
}

impl Default for SceneSpec {
    fn default() -> Self {
        use ShapeKind::*;
        let styles = [
            (Square, [220, 40, 40]),
            (Disk, [40, 180, 60]),
            (Triangle, [40, 70, 230]),
            (Ring, [235, 210, 40]),
            (Cross, [200, 50, 200]),
            (Diamond, [40, 205, 215]),
            (Frame, [245, 135, 25]),
            (Stripes, [250, 250, 250]),
        ]
        .into_iter()
        .map(|(shape, color)| ClassStyle { shape, color })
        .collect();
        Self {
            width: 416,
            height: 416,
            styles,
            min_objects: 1,
            max_objects: 4,
            min_size: 48,
            max_size: 128,
            max_retries: 50,
        }
    }
}

/// Pixel rectangle `[x, x + w) x [y, y + h)` holding one object.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Placement {
    pub class_id: usize,
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Placement {
    fn overlaps(&self, o: &Placement, margin: usize) -> bool {
        self.x < o.x + o.w + margin
            && o.x < self.x + self.w + margin
            && self.y < o.y + o.h + margin
            && o.y < self.y + self.h + margin
    }
}

/// Paints a noisy background and the given objects. Boxes are the exact
/// bounds of the painted pixels of each object.
pub fn render_scene(spec: &SceneSpec, placements: &[Placement], rng: &mut impl Rng) -> (Image, Vec<BBox>) {
    let (w, h) = (spec.width, spec.height);
    let base: [i32; 3] = std::array::from_fn(|_| rng.gen_range(70..150));
    let tilt = [rng.gen_range(-30..=30), rng.gen_range(-30..=30)];
    let mut img = Image::filled(w, h, [0, 0, 0]);
    for y in 0..h {
        for x in 0..w {
            let shade = (tilt[0] * x as i32) / w as i32 + (tilt[1] * y as i32) / h as i32;
            let px = std::array::from_fn(|c| (base[c] + shade + rng.gen_range(-12..=12)).clamp(0, 255) as u8);
            img.put(x, y, px);
        }
    }
    let mut boxes = Vec::with_capacity(placements.len());
    for p in placements {
        let style = spec.styles[p.class_id];
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for v in 0..p.h {
            for u in 0..p.w {
                let (x, y) = (p.x + u, p.y + v);
                if x >= w || y >= h || !style.shape.covers(u, v, p.w, p.h) {
                    continue;
                }
                let px = style.color.map(|c| (c as i32 + rng.gen_range(-10..=10)).clamp(0, 255) as u8);
                img.put(x, y, px);
                (x0, y0, x1, y1) = (x0.min(x), y0.min(y), x1.max(x + 1), y1.max(y + 1));
            }
        }
        if x0 == usize::MAX {
            continue;
        }
        let b = BBox::from_corners(x0 as f64, y0 as f64, x1 as f64, y1 as f64, w as f64, h as f64, p.class_id)
            .expect("painted bounds are ordered");
        boxes.push(b);
    }
    (img, boxes)
}

/// Random non-overlapping objects with uniformly drawn classes and sizes.
/// Objects that cannot be placed within the retry budget are skipped.
pub fn generate_scene(spec: &SceneSpec, rng: &mut impl Rng) -> (Image, Annotation) {
    let count = rng.gen_range(spec.min_objects..=spec.max_objects.max(spec.min_objects));
    let max_size = spec.max_size.min(spec.width).min(spec.height);
    let min_size = spec.min_size.clamp(1, max_size);
    let mut placed: Vec<Placement> = Vec::with_capacity(count);
    for _ in 0..count {
        let class_id = rng.gen_range(0..spec.styles.len());
        let mut ok = None;
        for _ in 0..spec.max_retries.max(1) {
            let side = rng.gen_range(min_size..=max_size);
            let aspect = rng.gen_range(0.75..=1.33f64);
            let pw = ((side as f64 * aspect.sqrt()).round() as usize).clamp(min_size, max_size);
            let ph = ((side as f64 / aspect.sqrt()).round() as usize).clamp(min_size, max_size);
            let cand = Placement {
                class_id,
                x: rng.gen_range(0..=spec.width - pw),
                y: rng.gen_range(0..=spec.height - ph),
                w: pw,
                h: ph,
            };
            if placed.iter().all(|p| !p.overlaps(&cand, 4)) {
                ok = Some(cand);
                break;
            }
        }
        match ok {
            Some(p) => placed.push(p),
            None => log::warn!("could not place object {} of {count} without overlap", placed.len() + 1),
        }
    }
    let (image, boxes) = render_scene(spec, &placed, rng);
    (
        image,
        Annotation {
            image_path: PathBuf::new(),
            boxes,
        },
    )
}
