use super::{read_annotation, read_ppm, write_annotation, write_ppm, Annotation, DataError, Image};
use crate::detector::BBox;
use rand::seq::SliceRandom;
use rand::{RngCore, SeedableRng};
use rand_xoshiro::{SplitMix64, Xoshiro256PlusPlus};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

impl Split {
    fn list_file(self) -> &'static str {
        match self {
            Split::Train => "train.txt",
            Split::Test => "test.txt",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub annotation: Annotation,
    pub image: Image,
}

/// A dataset directory: `classes.txt`, `train.txt`/`test.txt` listing image
/// paths relative to the root, `images/<stem>.ppm` and `labels/<stem>.txt`.
/// Everything is read and validated up front.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    pub class_names: Vec<String>,
    train: Vec<Sample>,
    test: Vec<Sample>,
}

impl Dataset {
    pub fn load(root: &Path) -> Result<Self, DataError> {
        let class_names = read_class_names(&root.join("classes.txt"))?;
        let mut ds = Self {
            root: root.to_path_buf(),
            class_names,
            train: Vec::new(),
            test: Vec::new(),
        };
        ds.train = ds.load_split(Split::Train)?;
        ds.test = ds.load_split(Split::Test)?;
        Ok(ds)
    }

    fn load_split(&self, split: Split) -> Result<Vec<Sample>, DataError> {
        let list = self.root.join(split.list_file());
        let text = std::fs::read_to_string(&list).map_err(DataError::io(&list))?;
        let mut samples = Vec::new();
        for rel in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            let image_path = self.root.join(rel);
            let label_path = label_path_for(&self.root, &image_path);
            let annotation = read_annotation(&label_path, &image_path, self.class_names.len())?;
            let image = read_ppm(&image_path)?;
            samples.push(Sample { annotation, image });
        }
        Ok(samples)
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn split(&self, split: Split) -> &[Sample] {
        match split {
            Split::Train => &self.train,
            Split::Test => &self.test,
        }
    }
}

fn read_class_names(path: &Path) -> Result<Vec<String>, DataError> {
    let text = std::fs::read_to_string(path).map_err(DataError::io(path))?;
    let names: Vec<String> = text.lines().map(|l| l.trim().to_string()).filter(|l| !l.is_empty()).collect();
    if names.is_empty() {
        return Err(DataError::dataset(path, "no class names"));
    }
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(DataError::dataset(path, format!("duplicate class name {n:?}")));
        }
    }
    Ok(names)
}

fn label_path_for(root: &Path, image_path: &Path) -> PathBuf {
    let stem = image_path.file_stem().unwrap_or_default();
    root.join("labels").join(stem).with_extension("txt")
}

/// Writes samples in the dataset layout; the first `train_count` go to the
/// training list, the rest to the test list.
pub fn write_dataset(
    root: &Path,
    class_names: &[&str],
    samples: &[(Image, Vec<BBox>)],
    train_count: usize,
) -> Result<(), DataError> {
    for sub in ["images", "labels"] {
        let dir = root.join(sub);
        std::fs::create_dir_all(&dir).map_err(DataError::io(&dir))?;
    }
    let mut lists = (String::new(), String::new());
    for (i, (image, boxes)) in samples.iter().enumerate() {
        let rel = format!("images/{i:05}.ppm");
        let image_path = root.join(&rel);
        write_ppm(&image_path, image)?;
        write_annotation(&label_path_for(root, &image_path), boxes)?;
        let list = if i < train_count { &mut lists.0 } else { &mut lists.1 };
        list.push_str(&rel);
        list.push('\n');
    }
    let write = |name: &str, text: String| {
        let path = root.join(name);
        std::fs::write(&path, text).map_err(DataError::io(&path))
    };
    write("classes.txt", class_names.iter().map(|n| format!("{n}\n")).collect())?;
    write("train.txt", lists.0)?;
    write("test.txt", lists.1)
}

fn mix(seed: u64, a: u64, b: u64) -> u64 {
    let mut sm = SplitMix64::seed_from_u64(seed ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ b.rotate_left(32));
    sm.next_u64()
}

/// Independent random stream for one sample in one epoch, so results do not
/// depend on processing order.
pub fn sample_rng(seed: u64, epoch: u64, index: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(mix(seed, epoch.wrapping_add(1), index))
}

/// Shuffled visiting order of `n` samples for one epoch.
pub fn epoch_order(seed: u64, epoch: u64, n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(mix(seed, epoch, u64::MAX));
    order.shuffle(&mut rng);
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let samples = vec![
            (Image::filled(4, 3, [1, 2, 3]), vec![BBox::new(0.5, 0.5, 0.2, 0.2, 1)]),
            (Image::filled(4, 3, [4, 5, 6]), vec![]),
            (Image::filled(2, 2, [7, 8, 9]), vec![BBox::new(0.25, 0.75, 0.5, 0.5, 0)]),
        ];
        write_dataset(dir.path(), &["a", "b"], &samples, 2).unwrap();
        let ds = Dataset::load(dir.path()).unwrap();
        assert_eq!(ds.class_names, vec!["a", "b"]);
        assert_eq!(ds.split(Split::Train).len(), 2);
        assert_eq!(ds.split(Split::Test).len(), 1);
        assert_eq!(ds.split(Split::Train)[0].annotation.boxes, samples[0].1);
        assert_eq!(ds.split(Split::Test)[0].image, samples[2].0);
    }

    #[test]
    fn invalid_label_rejected_at_load() {
        let dir = tempfile::tempdir().unwrap();
        let samples = vec![(Image::filled(2, 2, [0, 0, 0]), vec![BBox::new(0.5, 0.5, 0.2, 0.2, 1)])];
        write_dataset(dir.path(), &["a"], &samples, 1).unwrap();
        let err = Dataset::load(dir.path()).unwrap_err();
        assert!(err.to_string().contains("class 1 out of range"), "{err}");
    }

    #[test]
    fn duplicate_class_names_rejected() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path(), &["a", "a"], &[], 0).unwrap();
        assert!(Dataset::load(dir.path()).is_err());
    }

    #[test]
    fn epoch_order_is_a_deterministic_permutation() {
        let a = epoch_order(5, 3, 50);
        assert_eq!(a, epoch_order(5, 3, 50));
        assert_ne!(a, epoch_order(5, 4, 50));
        let mut sorted = a.clone();
        sorted.sort();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
    }
}
