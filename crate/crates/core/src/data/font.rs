use super::Image;

const GLYPH_W: usize = 3;
const GLYPH_H: usize = 5;

/// 3×5 glyph rows, most significant of the low three bits is the left column.
fn glyph(c: char) -> [u8; GLYPH_H] {
    match c.to_ascii_uppercase() {
        'A' => [0b010, 0b101, 0b111, 0b101, 0b101],
        'B' => [0b110, 0b101, 0b110, 0b101, 0b110],
        'C' => [0b011, 0b100, 0b100, 0b100, 0b011],
        'D' => [0b110, 0b101, 0b101, 0b101, 0b110],
        'E' => [0b111, 0b100, 0b110, 0b100, 0b111],
        'F' => [0b111, 0b100, 0b110, 0b100, 0b100],
        'G' => [0b011, 0b100, 0b101, 0b101, 0b011],
        'H' => [0b101, 0b101, 0b111, 0b101, 0b101],
        'I' => [0b111, 0b010, 0b010, 0b010, 0b111],
        'J' => [0b001, 0b001, 0b001, 0b101, 0b010],
        'K' => [0b101, 0b101, 0b110, 0b101, 0b101],
        'L' => [0b100, 0b100, 0b100, 0b100, 0b111],
        'M' => [0b101, 0b111, 0b111, 0b101, 0b101],
        'N' => [0b110, 0b101, 0b101, 0b101, 0b101],
        'O' => [0b010, 0b101, 0b101, 0b101, 0b010],
        'P' => [0b110, 0b101, 0b110, 0b100, 0b100],
        'Q' => [0b010, 0b101, 0b101, 0b110, 0b011],
        'R' => [0b110, 0b101, 0b110, 0b101, 0b101],
        'S' => [0b011, 0b100, 0b010, 0b001, 0b110],
        'T' => [0b111, 0b010, 0b010, 0b010, 0b010],
        'U' => [0b101, 0b101, 0b101, 0b101, 0b111],
        'V' => [0b101, 0b101, 0b101, 0b101, 0b010],
        'W' => [0b101, 0b101, 0b111, 0b111, 0b101],
        'X' => [0b101, 0b101, 0b010, 0b101, 0b101],
        'Y' => [0b101, 0b101, 0b010, 0b010, 0b010],
        'Z' => [0b111, 0b001, 0b010, 0b100, 0b111],
        '0' => [0b111, 0b101, 0b101, 0b101, 0b111],
        '1' => [0b010, 0b110, 0b010, 0b010, 0b111],
        '2' => [0b110, 0b001, 0b010, 0b100, 0b111],
        '3' => [0b110, 0b001, 0b010, 0b001, 0b110],
        '4' => [0b101, 0b101, 0b111, 0b001, 0b001],
        '5' => [0b111, 0b100, 0b110, 0b001, 0b110],
        '6' => [0b011, 0b100, 0b111, 0b101, 0b111],
        '7' => [0b111, 0b001, 0b010, 0b010, 0b010],
        '8' => [0b111, 0b101, 0b111, 0b101, 0b111],
        '9' => [0b111, 0b101, 0b111, 0b001, 0b110],
        '.' => [0, 0, 0, 0, 0b010],
        '-' | '_' => [0, 0, 0b111, 0, 0],
        ' ' => [0; GLYPH_H],
        _ => [0b111, 0b101, 0b101, 0b101, 0b111],
    }
}

/// Pixel size of `text` rendered at `scale`.
pub fn text_size(text: &str, scale: usize) -> (usize, usize) {
    let n = text.chars().count();
    let w = if n == 0 { 0 } else { (n * (GLYPH_W + 1) - 1) * scale };
    (w, GLYPH_H * scale)
}

/// Burns `text` into the image with its top-left corner at `(x, y)` on a
/// filled background box. Pixels outside the image are clipped.
pub fn draw_text(img: &mut Image, x: i64, y: i64, text: &str, scale: usize, fg: [u8; 3], bg: [u8; 3]) {
    let scale = scale.max(1);
    let (tw, th) = text_size(text, scale);
    let mut put = |px: i64, py: i64, rgb: [u8; 3]| {
        if px >= 0 && py >= 0 && (px as usize) < img.width() && (py as usize) < img.height() {
            img.put(px as usize, py as usize, rgb);
        }
    };
    for py in -1..=th as i64 {
        for px in -1..=tw as i64 {
            put(x + px, y + py, bg);
        }
    }
    for (i, c) in text.chars().enumerate() {
        let gx = x + (i * (GLYPH_W + 1) * scale) as i64;
        for (row, bits) in glyph(c).iter().enumerate() {
            for col in 0..GLYPH_W {
                if bits >> (GLYPH_W - 1 - col) & 1 == 1 {
                    for dy in 0..scale {
                        for dx in 0..scale {
                            put(gx + (col * scale + dx) as i64, y + (row * scale + dy) as i64, fg);
                        }
                    }
                }
            }
        }
    }
}
