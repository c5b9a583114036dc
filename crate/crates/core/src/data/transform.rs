use super::Image;
use crate::netcore::TrainConfig;
use rand::Rng;

/// Bilinear resize with half-pixel centers and edge clamping.
pub fn resize_bilinear(img: &Image, width: usize, height: usize) -> Image {
    if img.width() == width && img.height() == height {
        return img.clone();
    }
    // Per output column/row: (lower source index, upper source index, weight of upper).
    let taps = |dst: usize, src: usize| -> Vec<(usize, usize, f64)> {
        let scale = src as f64 / dst as f64;
        (0..dst)
            .map(|o| {
                let s = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
                let lo = s.floor() as usize;
                let hi = (lo + 1).min(src - 1);
                (lo, hi, s - lo as f64)
            })
            .collect()
    };
    let xs = taps(width, img.width());
    let ys = taps(height, img.height());
    let src = img.pixels();
    let sw = img.width();
    let mut out = vec![0u8; width * height * 3];
    for (y, &(y0, y1, fy)) in ys.iter().enumerate() {
        for (x, &(x0, x1, fx)) in xs.iter().enumerate() {
            for c in 0..3 {
                let at = |yy: usize, xx: usize| src[(yy * sw + xx) * 3 + c] as f64;
                let top = at(y0, x0) * (1.0 - fx) + at(y0, x1) * fx;
                let bottom = at(y1, x0) * (1.0 - fx) + at(y1, x1) * fx;
                let v = top * (1.0 - fy) + bottom * fy;
                out[(y * width + x) * 3 + c] = v.round().clamp(0.0, 255.0) as u8;
            }
        }
    }
    Image::new(width, height, out).expect("positive output dims")
}

/// RGB in [0, 1] to (hue as a fraction of the circle, saturation, value).
pub fn rgb_to_hsv(r: f64, g: f64, b: f64) -> (f64, f64, f64) {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = max - min;
    let s = if max > 0.0 { delta / max } else { 0.0 };
    if delta <= 0.0 {
        return (0.0, s, max);
    }
    let h = if max == r {
        ((g - b) / delta).rem_euclid(6.0)
    } else if max == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    (h / 6.0, s, max)
}

pub fn hsv_to_rgb(h: f64, s: f64, v: f64) -> (f64, f64, f64) {
    let h6 = h.rem_euclid(1.0) * 6.0;
    let sector = (h6.floor() as i64).rem_euclid(6);
    let f = h6 - h6.floor();
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    match sector {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    }
}

/// One draw of the color jitter: hue shift in circle fractions and
/// multiplicative saturation/value factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvJitter {
    pub hue_shift: f64,
    pub saturation: f64,
    pub value: f64,
}

impl HsvJitter {
    pub fn sample(cfg: &TrainConfig, rng: &mut impl Rng) -> Self {
        let log_uniform = |rng: &mut dyn rand::RngCore, s: f64| {
            if s > 1.0 {
                rng.gen_range(-s.ln()..=s.ln()).exp()
            } else {
                1.0
            }
        };
        let hue_shift = if cfg.hue > 0.0 {
            rng.gen_range(-cfg.hue..=cfg.hue)
        } else {
            0.0
        };
        Self {
            hue_shift,
            saturation: log_uniform(rng, cfg.saturation),
            value: log_uniform(rng, cfg.exposure),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.hue_shift == 0.0 && self.saturation == 1.0 && self.value == 1.0
    }

    pub fn apply(&self, img: &Image) -> Image {
        if self.is_identity() {
            return img.clone();
        }
        let mut out = img.clone();
        for px in out.pixels_mut().chunks_exact_mut(3) {
            let (h, s, v) = rgb_to_hsv(px[0] as f64 / 255.0, px[1] as f64 / 255.0, px[2] as f64 / 255.0);
            let (r, g, b) = hsv_to_rgb(
                h + self.hue_shift,
                (s * self.saturation).min(1.0),
                (v * self.value).min(1.0),
            );
            for (dst, c) in px.iter_mut().zip([r, g, b]) {
                *dst = (c * 255.0).round().clamp(0.0, 255.0) as u8;
            }
        }
        out
    }
}

/// Random hue, saturation and exposure (value) jitter; geometry is untouched.
pub fn augment_hsv(img: &Image, cfg: &TrainConfig, rng: &mut impl Rng) -> Image {
    HsvJitter::sample(cfg, rng).apply(img)
}
