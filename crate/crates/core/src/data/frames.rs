use super::{Annotation, DataError};
use std::path::{Path, PathBuf};

/// Trailing decimal number of a file stem: `frame_0042.ppm` is 42.
pub fn frame_number(path: &Path) -> Option<u64> {
    let stem = path.file_stem()?.to_str()?;
    let digits = stem.len() - stem.trim_end_matches(|c: char| c.is_ascii_digit()).len();
    stem[stem.len() - digits..].parse().ok()
}

/// Numbered `.ppm` files in `dir`, in ascending numeric order. Gaps in the
/// numbering are logged, not rejected.
pub fn numbered_frames(dir: &Path) -> Result<Vec<(u64, PathBuf)>, DataError> {
    let mut frames = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(DataError::io(dir))? {
        let path = entry.map_err(DataError::io(dir))?.path();
        let is_ppm = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("ppm"));
        if !is_ppm || !path.is_file() {
            continue;
        }
        if let Some(n) = frame_number(&path) {
            frames.push((n, path));
        }
    }
    frames.sort();
    for pair in frames.windows(2) {
        let (a, b) = (pair[0].0, pair[1].0);
        if b > a + 1 {
            log::warn!("{}: frame numbering jumps from {a} to {b}", dir.display());
        } else if b == a {
            log::warn!("{}: duplicate frame number {a}", dir.display());
        }
    }
    Ok(frames)
}

/// Every `k`-th frame of a converted video as an unlabeled annotation stub.
pub fn ingest_frame_sequence(dir: &Path, every: usize) -> Result<Vec<Annotation>, DataError> {
    if every == 0 {
        return Err(DataError::dataset(dir, "frame stride must be at least 1"));
    }
    Ok(numbered_frames(dir)?
        .into_iter()
        .step_by(every)
        .map(|(_, image_path)| Annotation {
            image_path,
            boxes: Vec::new(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn touch(dir: &Path, name: &str) {
        std::fs::write(dir.join(name), b"").unwrap();
    }

    #[test]
    fn numbers_from_stems() {
        assert_eq!(frame_number(Path::new("a/frame_0042.ppm")), Some(42));
        assert_eq!(frame_number(Path::new("7.ppm")), Some(7));
        assert_eq!(frame_number(Path::new("cover.ppm")), None);
    }

    #[test]
    fn subsampling() {
        let dir = tempfile::tempdir().unwrap();
        for i in 0..30 {
            touch(dir.path(), &format!("f{i}.ppm"));
        }
        touch(dir.path(), "notes.txt");
        let stubs = ingest_frame_sequence(dir.path(), 10).unwrap();
        let picked: Vec<u64> = stubs.iter().map(|a| frame_number(&a.image_path).unwrap()).collect();
        assert_eq!(picked, vec![0, 10, 20]);
        assert!(stubs.iter().all(|a| a.boxes.is_empty()));
        assert_eq!(ingest_frame_sequence(dir.path(), 1).unwrap().len(), 30);
        assert!(ingest_frame_sequence(dir.path(), 0).is_err());
    }

    #[test]
    fn gaps_keep_numeric_order() {
        let dir = tempfile::tempdir().unwrap();
        for i in [10, 2, 1, 100, 7] {
            touch(dir.path(), &format!("frame_{i}.ppm"));
        }
        let got: Vec<u64> = numbered_frames(dir.path()).unwrap().into_iter().map(|f| f.0).collect();
        assert_eq!(got, vec![1, 2, 7, 10, 100]);
    }
}
