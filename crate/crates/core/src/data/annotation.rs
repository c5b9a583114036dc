use super::DataError;
use crate::detector::BBox;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Ground-truth boxes for one image. An empty box list is a negative frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub image_path: PathBuf,
    pub boxes: Vec<BBox>,
}

/// Parses `classId cx cy w h` lines. Blank lines are skipped; errors carry
/// the 1-based line and column of the offending token.
pub fn parse_annotation(text: &str, path: &Path, num_classes: usize) -> Result<Vec<BBox>, DataError> {
    let mut boxes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let fail = |column: usize, message: String| DataError::Annotation {
            path: path.to_path_buf(),
            line: i + 1,
            column,
            message,
        };
        let tokens: Vec<(usize, &str)> = tokens_with_columns(line).collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 5 {
            let col = tokens.get(5).map_or(line.len() + 1, |t| t.0);
            return Err(fail(col, format!("expected 5 fields, found {}", tokens.len())));
        }
        let (ccol, ctok) = tokens[0];
        let class_id: usize = ctok
            .parse()
            .map_err(|_| fail(ccol, format!("malformed class id {ctok:?}")))?;
        if class_id >= num_classes {
            return Err(fail(ccol, format!("class {class_id} out of range for {num_classes} classes")));
        }
        let mut v = [0.0f64; 4];
        for (slot, &(col, tok)) in v.iter_mut().zip(&tokens[1..]) {
            *slot = tok
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| fail(col, format!("malformed number {tok:?}")))?;
        }
        let bbox = BBox::new(v[0], v[1], v[2], v[3], class_id);
        if let Err(e) = bbox.validate(num_classes) {
            return Err(fail(tokens[1].0, e.to_string()));
        }
        boxes.push(bbox);
    }
    Ok(boxes)
}

fn tokens_with_columns(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = line;
    let mut offset = 0;
    std::iter::from_fn(move || {
        let start = rest.find(|c: char| !c.is_whitespace())?;
        let after = &rest[start..];
        let len = after.find(char::is_whitespace).unwrap_or(after.len());
        let tok = &after[..len];
        let col = offset + start + 1;
        offset += start + len;
        rest = &after[len..];
        Some((col, tok))
    })
}

/// Inverse of [`parse_annotation`]. Numbers use the shortest decimal form
/// that parses back to the same value.
pub fn serialize_annotation(boxes: &[BBox]) -> String {
    let mut out = String::new();
    for b in boxes {
        let _ = writeln!(out, "{} {} {} {} {}", b.class_id, b.cx, b.cy, b.w, b.h);
    }
    out
}

pub fn read_annotation(label_path: &Path, image_path: &Path, num_classes: usize) -> Result<Annotation, DataError> {
    let text = std::fs::read_to_string(label_path).map_err(DataError::io(label_path))?;
    Ok(Annotation {
        image_path: image_path.to_path_buf(),
        boxes: parse_annotation(&text, label_path, num_classes)?,
    })
}

pub fn write_annotation(label_path: &Path, boxes: &[BBox]) -> Result<(), DataError> {
    std::fs::write(label_path, serialize_annotation(boxes)).map_err(DataError::io(label_path))
}
