//! CIFAR-10/100 binary batches.
//!
//! Each record is one label byte (CIFAR-100: coarse then fine label) followed
//! by 3072 pixel bytes: the red, green and blue 32×32 planes in row-major
//! order.

use super::DataError;
use crate::image::ColorImage;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const CIFAR_SIDE: usize = 32;
const PIXELS: usize = 3 * CIFAR_SIDE * CIFAR_SIDE;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CifarVariant {
    Cifar10,
    Cifar100,
}

impl CifarVariant {
    pub fn class_count(self) -> usize {
        match self {
            CifarVariant::Cifar10 => 10,
            CifarVariant::Cifar100 => 100,
        }
    }

    fn label_bytes(self) -> usize {
        match self {
            CifarVariant::Cifar10 => 1,
            CifarVariant::Cifar100 => 2,
        }
    }

    pub fn record_size(self) -> usize {
        self.label_bytes() + PIXELS
    }

    fn files(self) -> (Vec<&'static str>, Vec<&'static str>) {
        match self {
            CifarVariant::Cifar10 => (
                vec![
                    "data_batch_1.bin",
                    "data_batch_2.bin",
                    "data_batch_3.bin",
                    "data_batch_4.bin",
                    "data_batch_5.bin",
                ],
                vec!["test_batch.bin"],
            ),
            CifarVariant::Cifar100 => (vec!["train.bin"], vec!["test.bin"]),
        }
    }

    fn subdir(self) -> &'static str {
        match self {
            CifarVariant::Cifar10 => "cifar-10-batches-bin",
            CifarVariant::Cifar100 => "cifar-100-binary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

/// Images kept as raw bytes; [`LabeledImageSet::image`] scales to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledImageSet {
    pixels: Vec<u8>,
    pub labels: Vec<u16>,
    pub class_count: usize,
    pub split: Split,
}

impl LabeledImageSet {
    /// `pixels` holds `labels.len()` planar 3×32×32 records back to back.
    pub fn new(pixels: Vec<u8>, labels: Vec<u16>, class_count: usize, split: Split) -> Result<Self, DataError> {
        if pixels.len() != labels.len() * PIXELS {
            return Err(DataError::Invalid(format!(
                "{} pixel bytes for {} images",
                pixels.len(),
                labels.len()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l as usize >= class_count) {
            return Err(DataError::Invalid(format!("label {l} outside 0..{class_count}")));
        }
        Ok(LabeledImageSet {
            pixels,
            labels,
            class_count,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn raw(&self, i: usize) -> &[u8] {
        &self.pixels[i * PIXELS..(i + 1) * PIXELS]
    }

    pub fn image(&self, i: usize) -> ColorImage {
        ColorImage::from_planar_bytes(CIFAR_SIDE, CIFAR_SIDE, 3, self.raw(i))
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.class_count];
        for &l in &self.labels {
            c[l as usize] += 1;
        }
        c
    }

    /// The images at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> LabeledImageSet {
        let mut pixels = Vec::with_capacity(indices.len() * PIXELS);
        for &i in indices {
            pixels.extend_from_slice(self.raw(i));
        }
        LabeledImageSet {
            pixels,
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
            split: self.split,
        }
    }

    fn extend(&mut self, other: LabeledImageSet) {
        self.pixels.extend(other.pixels);
        self.labels.extend(other.labels);
    }
}

/// Parses one batch file. CIFAR-100 records keep the fine label.
pub fn read_batch(path: &Path, variant: CifarVariant, split: Split) -> Result<LabeledImageSet, DataError> {
    let bytes = std::fs::read(path).map_err(|e| DataError::io(path, e))?;
    let rec = variant.record_size();
    let complete = bytes.len() / rec;
    if bytes.len() % rec != 0 {
        return Err(DataError::Truncated {
            path: path.to_path_buf(),
            offset: (complete * rec) as u64,
            record_size: rec,
            complete_records: complete,
        });
    }
    let classes = variant.class_count();
    let mut pixels = Vec::with_capacity(complete * PIXELS);
    let mut labels = Vec::with_capacity(complete);
    for (i, record) in bytes.chunks_exact(rec).enumerate() {
        let label_pos = variant.label_bytes() - 1;
        let label = record[label_pos] as u16;
        if label as usize >= classes {
            return Err(DataError::LabelOutOfRange {
                path: path.to_path_buf(),
                offset: (i * rec + label_pos) as u64,
                label,
                class_count: classes,
            });
        }
        labels.push(label);
        pixels.extend_from_slice(&record[variant.label_bytes()..]);
    }
    Ok(LabeledImageSet {
        pixels,
        labels,
        class_count: classes,
        split,
    })
}

/// Writes `set` in batch format. CIFAR-100 coarse labels are written as 0.
pub fn write_batch(path: &Path, set: &LabeledImageSet, variant: CifarVariant) -> Result<(), DataError> {
    super::write_atomic(path, |w| {
        for i in 0..set.len() {
            if variant == CifarVariant::Cifar100 {
                w.write_all(&[0])?;
            }
            w.write_all(&[set.labels[i] as u8])?;
            w.write_all(set.raw(i))?;
        }
        Ok(())
    })
}

fn resolve_dir(root: &Path, variant: CifarVariant) -> PathBuf {
    let (train, _) = variant.files();
    if root.join(train[0]).exists() {
        root.to_path_buf()
    } else {
        root.join(variant.subdir())
    }
}

/// Loads the train and test splits from `root` or its standard
/// subdirectory (`cifar-10-batches-bin`, `cifar-100-binary`).
pub fn load_cifar(root: &Path, variant: CifarVariant) -> Result<(LabeledImageSet, LabeledImageSet), DataError> {
    let dir = resolve_dir(root, variant);
    let (train_files, test_files) = variant.files();
    let load = |files: &[&str], split: Split| -> Result<LabeledImageSet, DataError> {
        let mut set = LabeledImageSet {
            pixels: Vec::new(),
            labels: Vec::new(),
            class_count: variant.class_count(),
            split,
        };
        for f in files {
            set.extend(read_batch(&dir.join(f), variant, split)?);
        }
        Ok(set)
    };
    Ok((load(&train_files, Split::Train)?, load(&test_files, Split::Test)?))
}

/// Ascending indices with exactly `total / class_count` rows per class,
/// drawn without replacement by ChaCha8 seeded with `seed`.
pub fn stratified_indices(labels: &[u16], class_count: usize, total: usize, seed: u64) -> Result<Vec<usize>, DataError> {
    if class_count == 0 || total % class_count != 0 {
        return Err(DataError::NotDivisible {
            total,
            classes: class_count,
        });
    }
    let per_class = total / class_count;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(total);
    for class in 0..class_count as u16 {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < per_class {
            return Err(DataError::Unavailable {
                class,
                requested: per_class,
                available: members.len(),
            });
        }
        out.extend(index::sample(&mut rng, members.len(), per_class).into_iter().map(|k| members[k]));
    }
    out.sort_unstable();
    Ok(out)
}

pub fn stratified_subsample(set: &LabeledImageSet, total: usize, seed: u64) -> Result<LabeledImageSet, DataError> {
    let idx = stratified_indices(&set.labels, set.class_count, total, seed)?;
    Ok(set.subset(&idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn synthetic(n: usize, classes: usize, seed: u64) -> LabeledImageSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pixels = (0..n * PIXELS).map(|_| rng.random()).collect();
        let labels = (0..n).map(|i| (i % classes) as u16).collect();
        LabeledImageSet::new(pixels, labels, classes, Split::Train).unwrap()
    }

    #[test]
    fn two_record_batch_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        for variant in [CifarVariant::Cifar10, CifarVariant::Cifar100] {
            let set = synthetic(2, variant.class_count(), 1);
            let path = dir.path().join("b.bin");
            write_batch(&path, &set, variant).unwrap();
            assert_eq!(std::fs::metadata(&path).unwrap().len() as usize, 2 * variant.record_size());
            let back = read_batch(&path, variant, Split::Train).unwrap();
            assert_eq!(back, set);
        }
    }

    #[test]
    fn pixels_scale_to_unit_interval() {
        let mut pixels = vec![0u8; PIXELS];
        pixels[0] = 255;
        pixels[1024] = 51;
        let set = LabeledImageSet::new(pixels, vec![3], 10, Split::Test).unwrap();
        let img = set.image(0);
        assert_eq!(img.channel(0).get(0, 0), 1.0);
        assert_eq!(img.channel(1).get(0, 0), 0.2);
        assert_eq!(img.channel(2).get(0, 0), 0.0);
    }

    #[test]
    fn truncated_file_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data_batch_1.bin");
        std::fs::write(&path, vec![0u8; 3073 * 2 + 100]).unwrap();
        let err = read_batch(&path, CifarVariant::Cifar10, Split::Train).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, DataError::Truncated { offset: 6146, complete_records: 2, .. }));
        assert!(msg.contains("data_batch_1.bin") && msg.contains("2 complete records"), "{msg}");
    }

    #[test]
    fn bad_label_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.bin");
        let mut bytes = vec![0u8; 3073 * 2];
        bytes[3073] = 12;
        std::fs::write(&path, bytes).unwrap();
        let err = read_batch(&path, CifarVariant::Cifar10, Split::Train).unwrap_err();
        assert!(matches!(err, DataError::LabelOutOfRange { offset: 3073, label: 12, .. }));
    }

    #[test]
    fn loads_directory_layout() {
        let root = tempfile::tempdir().unwrap();
        let dir = root.path().join("cifar-10-batches-bin");
        std::fs::create_dir(&dir).unwrap();
        for (k, f) in ["data_batch_1.bin", "data_batch_2.bin", "data_batch_3.bin", "data_batch_4.bin", "data_batch_5.bin"]
            .iter()
            .enumerate()
        {
            write_batch(&dir.join(f), &synthetic(20, 10, k as u64), CifarVariant::Cifar10).unwrap();
        }
        let err = load_cifar(root.path(), CifarVariant::Cifar10).unwrap_err();
        assert!(matches!(err, DataError::MissingFile { ref path } if path.ends_with("test_batch.bin")));
        write_batch(&dir.join("test_batch.bin"), &synthetic(10, 10, 9), CifarVariant::Cifar10).unwrap();
        let (train, test) = load_cifar(root.path(), CifarVariant::Cifar10).unwrap();
        assert_eq!((train.len(), test.len()), (100, 10));
        assert_eq!(train.class_counts(), vec![10; 10]);
        assert_eq!(test.split, Split::Test);
    }

    #[test]
    fn subsample_is_stratified_and_seeded() {
        let set = synthetic(300, 10, 2);
        let a = stratified_subsample(&set, 100, 7).unwrap();
        assert_eq!(a.class_counts(), vec![10; 10]);
        let b = stratified_subsample(&set, 100, 7).unwrap();
        assert_eq!(a, b);
        let ia = stratified_indices(&set.labels, 10, 100, 7).unwrap();
        let ic = stratified_indices(&set.labels, 10, 100, 8).unwrap();
        assert_ne!(ia, ic);
        let full = stratified_indices(&set.labels, 10, 300, 1).unwrap();
        assert_eq!(full, (0..300).collect::<Vec<_>>());
    }

    #[test]
    fn subsample_errors() {
        let set = synthetic(30, 10, 3);
        assert!(matches!(stratified_subsample(&set, 15, 0), Err(DataError::NotDivisible { .. })));
        assert!(matches!(
            stratified_subsample(&set, 40, 0),
            Err(DataError::Unavailable {
                requested: 4,
                available: 3,
                ..
            })
        ));
    }
}
