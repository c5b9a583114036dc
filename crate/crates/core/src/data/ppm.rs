use super::{DataError, Image};
use std::path::Path;

/// Decodes a binary (P6) pixmap with maxval 255. Comments are allowed
/// anywhere in the header; exactly one whitespace byte separates the header
/// from the raster. Bytes after the raster are ignored.
pub fn decode_ppm(bytes: &[u8]) -> Result<Image, DataError> {
    let mut pos = 0;
    let magic = next_token(bytes, &mut pos);
    if magic != b"P6" {
        return Err(DataError::PpmMagic(String::from_utf8_lossy(magic).into_owned()));
    }
    let mut field = |name: &str| -> Result<u32, DataError> {
        let tok = next_token(bytes, &mut pos);
        if tok.is_empty() {
            return Err(DataError::PpmHeader(format!("missing {name}")));
        }
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse::<u32>().ok())
            .ok_or_else(|| DataError::PpmHeader(format!("bad {name} {:?}", String::from_utf8_lossy(tok))))
    };
    let width = field("width")? as usize;
    let height = field("height")? as usize;
    let maxval = field("maxval")?;
    if width == 0 || height == 0 {
        return Err(DataError::PpmHeader(format!("empty image {width}x{height}")));
    }
    if maxval != 255 {
        return Err(DataError::PpmMaxval(maxval));
    }
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => return Err(DataError::PpmHeader("no whitespace before raster".into())),
    }
    let expected = width * height * 3;
    let raster = &bytes[pos..];
    if raster.len() < expected {
        return Err(DataError::PpmTruncated {
            expected,
            found: raster.len(),
        });
    }
    Ok(Image::new(width, height, raster[..expected].to_vec()).expect("length checked"))
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> &'a [u8] {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' && bytes[*pos] != b'\r' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() && bytes[*pos] != b'#' {
        *pos += 1;
    }
    &bytes[start..*pos]
}

/// Canonical encoding: `P6\n<w> <h>\n255\n` followed by the raster.
pub fn encode_ppm(img: &Image) -> Vec<u8> {
    let mut out = format!("P6\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend_from_slice(img.pixels());
    out
}

pub fn read_ppm(path: &Path) -> Result<Image, DataError> {
    let bytes = std::fs::read(path).map_err(DataError::io(path))?;
    decode_ppm(&bytes).map_err(|e| DataError::dataset(path, e.to_string()))
}

pub fn write_ppm(path: &Path, img: &Image) -> Result<(), DataError> {
    std::fs::write(path, encode_ppm(img)).map_err(DataError::io(path))
}
