//! IDX ingestion (MNIST / EMNIST balanced) and deterministic stratified splits.
//!
//! IDX layout: a big-endian `u32` magic (`0x00000803` for images,
//! `0x00000801` for labels), one big-endian `u32` per dimension, then a
//! row-major unsigned-byte payload.

use std::fmt;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SIDE: usize = 28;
pub const PIXELS: usize = SIDE * SIDE;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

const IMAGE_HEADER: usize = 16;
const LABEL_HEADER: usize = 8;

/// A 28x28 grayscale image, row-major, intensities in `0..=255`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Image(pub [u8; PIXELS]);

impl Image {
    pub fn zeros() -> Self {
        Image([0; PIXELS])
    }

    pub fn from_slice(pixels: &[u8]) -> Result<Self> {
        let arr: [u8; PIXELS] = pixels
            .try_into()
            .map_err(|_| Error::shape(format!("{PIXELS} pixels"), format!("{} pixels", pixels.len())))?;
        Ok(Image(arr))
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.0[row * SIDE + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: u8) {
        self.0[row * SIDE + col] = value;
    }

    pub fn pixels(&self) -> &[u8; PIXELS] {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        let mut out = Image::zeros();
        for r in 0..SIDE {
            for c in 0..SIDE {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }
}

impl Default for Image {
    fn default() -> Self {
        Image::zeros()
    }
}

impl fmt::Debug for Image {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lit = self.0.iter().filter(|&&p| p > 0).count();
        write!(f, "Image({lit} nonzero of {PIXELS})")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageSample {
    pub pixels: Image,
    pub label: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetKind {
    Mnist,
    EmnistBalanced,
}

impl DatasetKind {
    pub fn class_names(self) -> Vec<String> {
        match self {
            DatasetKind::Mnist => (0..10).map(|d| d.to_string()).collect(),
            DatasetKind::EmnistBalanced => {
                let mut names: Vec<String> = (0..10).map(|d| d.to_string()).collect();
                names.extend(('A'..='Z').map(String::from));
                names.extend("abdefghnqrt".chars().map(String::from));
                names
            }
        }
    }

    pub fn class_count(self) -> usize {
        match self {
            DatasetKind::Mnist => 10,
            DatasetKind::EmnistBalanced => 47,
        }
    }
}

impl std::str::FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mnist" => Ok(DatasetKind::Mnist),
            "emnist-balanced" | "emnist" => Ok(DatasetKind::EmnistBalanced),
            other => Err(Error::InvalidArgument(format!("unknown dataset kind `{other}`"))),
        }
    }
}

/// An ordered, immutable collection of labelled samples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    samples: Vec<ImageSample>,
    class_count: usize,
    class_names: Vec<String>,
}

impl Dataset {
    pub fn new(samples: Vec<ImageSample>, class_names: Vec<String>) -> Result<Self> {
        let class_count = class_names.len();
        if class_count == 0 {
            return Err(Error::InvalidArgument("a dataset needs at least one class".into()));
        }
        if let Some(bad) = samples.iter().find(|s| s.label >= class_count) {
            return Err(Error::LabelOutOfRange {
                label: bad.label,
                class_count,
            });
        }
        Ok(Dataset {
            samples,
            class_count,
            class_names,
        })
    }

    /// Binds parsed images and labels. EMNIST images are re-oriented upright.
    pub fn from_idx(image_bytes: &[u8], label_bytes: &[u8], kind: DatasetKind) -> Result<Self> {
        let images = parse_idx_images(image_bytes)?;
        let labels = parse_idx_labels(label_bytes)?;
        if images.len() != labels.len() {
            return Err(Error::shape(
                format!("{} labels", images.len()),
                format!("{} labels", labels.len()),
            ));
        }
        let samples = images
            .into_iter()
            .zip(labels)
            .map(|(img, label)| ImageSample {
                pixels: match kind {
                    DatasetKind::Mnist => img,
                    DatasetKind::EmnistBalanced => orient_emnist(&img),
                },
                label: label as usize,
            })
            .collect();
        Dataset::new(samples, kind.class_names())
    }

    pub fn load_idx(images: &Path, labels: &Path, kind: DatasetKind) -> Result<Self> {
        let image_bytes = std::fs::read(images).map_err(|e| Error::io(images, e))?;
        let label_bytes = std::fs::read(labels).map_err(|e| Error::io(labels, e))?;
        Dataset::from_idx(&image_bytes, &label_bytes, kind)
    }

    pub fn samples(&self) -> &[ImageSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    /// Number of samples per class.
    pub fn support(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for s in &self.samples {
            counts[s.label] += 1;
        }
        counts
    }

    pub fn with_samples(&self, samples: Vec<ImageSample>) -> Dataset {
        Dataset {
            samples,
            class_count: self.class_count,
            class_names: self.class_names.clone(),
        }
    }

    /// Concatenates two datasets over the same class set.
    pub fn merge(&self, other: &Dataset) -> Result<Dataset> {
        if self.class_names != other.class_names {
            return Err(Error::InvalidArgument("cannot merge datasets with different classes".into()));
        }
        let mut samples = self.samples.clone();
        samples.extend(other.samples.iter().cloned());
        Ok(self.with_samples(samples))
    }

    /// SHA-256 over labels and pixels, hex encoded.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.class_count as u32).to_le_bytes());
        for s in &self.samples {
            hasher.update((s.label as u32).to_le_bytes());
            hasher.update(s.pixels.0);
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn to_idx(&self) -> (Vec<u8>, Vec<u8>) {
        let images: Vec<Image> = self.samples.iter().map(|s| s.pixels.clone()).collect();
        let labels: Vec<u8> = self.samples.iter().map(|s| s.label as u8).collect();
        (encode_idx_images(&images), encode_idx_labels(&labels))
    }
}

fn read_u32_be(bytes: &[u8], offset: usize) -> Result<u32> {
    let chunk = bytes.get(offset..offset + 4).ok_or(Error::Truncated {
        expected: offset + 4,
        found: bytes.len(),
    })?;
    Ok(u32::from_be_bytes(chunk.try_into().expect("4-byte slice")))
}

fn check_magic(bytes: &[u8], expected: u32) -> Result<()> {
    let found = read_u32_be(bytes, 0)?;
    if found != expected {
        return Err(Error::BadMagic { expected, found });
    }
    Ok(())
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<Vec<Image>> {
    check_magic(bytes, IMAGE_MAGIC)?;
    let count = read_u32_be(bytes, 4)? as usize;
    let rows = read_u32_be(bytes, 8)? as usize;
    let cols = read_u32_be(bytes, 12)? as usize;
    if rows != SIDE || cols != SIDE {
        return Err(Error::shape(format!("{SIDE}x{SIDE}"), format!("{rows}x{cols}")));
    }
    let expected = IMAGE_HEADER + count * PIXELS;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    Ok(bytes[IMAGE_HEADER..expected]
        .chunks_exact(PIXELS)
        .map(|chunk| Image(chunk.try_into().expect("chunk of PIXELS bytes")))
        .collect())
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    check_magic(bytes, LABEL_MAGIC)?;
    let count = read_u32_be(bytes, 4)? as usize;
    let expected = LABEL_HEADER + count;
    if bytes.len() < expected {
        return Err(Error::Truncated {
            expected,
            found: bytes.len(),
        });
    }
    Ok(bytes[LABEL_HEADER..expected].to_vec())
}

pub fn encode_idx_images(images: &[Image]) -> Vec<u8> {
    let mut out = Vec::with_capacity(IMAGE_HEADER + images.len() * PIXELS);
    out.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&(images.len() as u32).to_be_bytes());
    out.extend_from_slice(&(SIDE as u32).to_be_bytes());
    out.extend_from_slice(&(SIDE as u32).to_be_bytes());
    for img in images {
        out.extend_from_slice(&img.0);
    }
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(LABEL_HEADER + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

/// EMNIST stores glyphs transposed relative to MNIST; this renders them upright.
///
/// The usual "rotate then mirror" recipe composes to a plain transpose, so the
/// operation is its own inverse.
pub fn orient_emnist(image: &Image) -> Image {
    image.transpose()
}

/// Inverse of [`orient_emnist`]: recovers the stored EMNIST layout.
pub fn unorient_emnist(image: &Image) -> Image {
    image.transpose()
}

/// Stratified, seeded partition into `(train, holdout)`.
///
/// The train side receives `round(fraction * len)` samples, allocated across
/// classes by largest remainder so every class keeps its share. Both sides
/// keep the input order.
pub fn split(dataset: &Dataset, fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!("split fraction {fraction} not in (0, 1)")));
    }
    let target = (fraction * dataset.len() as f64).round() as usize;
    let in_train = stratified_pick(dataset, target, seed);
    let (mut train, mut holdout) = (Vec::with_capacity(target), Vec::new());
    for (keep, sample) in in_train.iter().zip(dataset.samples()) {
        if *keep {
            train.push(sample.clone());
        } else {
            holdout.push(sample.clone());
        }
    }
    Ok((dataset.with_samples(train), dataset.with_samples(holdout)))
}

/// Draws exactly `n` samples, stratified by class.
pub fn stratified_subset(dataset: &Dataset, n: usize, seed: u64) -> Result<Dataset> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if n > dataset.len() {
        return Err(Error::InvalidArgument(format!(
            "requested {n} samples from a dataset of {}",
            dataset.len()
        )));
    }
    let keep = stratified_pick(dataset, n, seed);
    Ok(dataset.with_samples(
        keep.iter()
            .zip(dataset.samples())
            .filter(|(k, _)| **k)
            .map(|(_, s)| s.clone())
            .collect(),
    ))
}

fn stratified_pick(dataset: &Dataset, target: usize, seed: u64) -> Vec<bool> {
    let total = dataset.len();
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); dataset.class_count()];
    for (i, s) in dataset.samples().iter().enumerate() {
        by_class[s.label].push(i);
    }

    // Largest-remainder apportionment of `target` across classes.
    let mut quota: Vec<usize> = Vec::with_capacity(by_class.len());
    let mut remainders: Vec<(f64, usize)> = Vec::new();
    for (class, members) in by_class.iter().enumerate() {
        let ideal = target as f64 * members.len() as f64 / total as f64;
        let base = ideal.floor() as usize;
        quota.push(base.min(members.len()));
        remainders.push((ideal - base as f64, class));
    }
    let mut missing = target - quota.iter().sum::<usize>();
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    while missing > 0 {
        let before = missing;
        for &(_, class) in &remainders {
            if missing == 0 {
                break;
            }
            if quota[class] < by_class[class].len() {
                quota[class] += 1;
                missing -= 1;
            }
        }
        if missing == before {
            break;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![false; total];
    for (members, &q) in by_class.iter_mut().zip(&quota) {
        members.shuffle(&mut rng);
        for &i in &members[..q] {
            keep[i] = true;
        }
    }
    keep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(magic: u32, dims: &[u32]) -> Vec<u8> {
        let mut out = magic.to_be_bytes().to_vec();
        for d in dims {
            out.extend_from_slice(&d.to_be_bytes());
        }
        out
    }

    fn toy(n: usize, classes: usize) -> Dataset {
        let samples = (0..n)
            .map(|i| {
                let mut img = Image::zeros();
                img.0[i % PIXELS] = (i % 251) as u8 + 1;
                ImageSample {
                    pixels: img,
                    label: i % classes,
                }
            })
            .collect();
        Dataset::new(samples, (0..classes).map(|c| c.to_string()).collect()).unwrap()
    }

    #[test]
    fn zero_count_image_file() {
        let bytes = header(IMAGE_MAGIC, &[0, 28, 28]);
        assert!(parse_idx_images(&bytes).unwrap().is_empty());
    }

    #[test]
    fn single_zero_image() {
        let mut bytes = header(IMAGE_MAGIC, &[1, 28, 28]);
        bytes.extend(std::iter::repeat_n(0, PIXELS));
        let images = parse_idx_images(&bytes).unwrap();
        assert_eq!(images.len(), 1);
        assert!(images[0].0.iter().all(|&p| p == 0));
    }

    #[test]
    fn image_errors() {
        let bytes = header(LABEL_MAGIC, &[0, 28, 28]);
        assert!(matches!(parse_idx_images(&bytes), Err(Error::BadMagic { .. })));

        let bytes = header(IMAGE_MAGIC, &[1, 28, 28]);
        assert!(matches!(parse_idx_images(&bytes), Err(Error::Truncated { .. })));

        let mut bytes = header(IMAGE_MAGIC, &[1, 32, 32]);
        bytes.extend(std::iter::repeat_n(0, 32 * 32));
        assert!(matches!(parse_idx_images(&bytes), Err(Error::ShapeMismatch { .. })));

        assert!(matches!(parse_idx_images(&[0, 0]), Err(Error::Truncated { .. })));
    }

    #[test]
    fn labels_direct_read() {
        let mut bytes = header(LABEL_MAGIC, &[3]);
        bytes.extend([0, 5, 9]);
        assert_eq!(parse_idx_labels(&bytes).unwrap(), vec![0, 5, 9]);
    }

    #[test]
    fn labels_truncated() {
        let bytes = header(LABEL_MAGIC, &[1]);
        assert!(matches!(parse_idx_labels(&bytes), Err(Error::Truncated { .. })));
    }

    #[test]
    fn label_out_of_range_on_bind() {
        let mut images = header(IMAGE_MAGIC, &[1, 28, 28]);
        images.extend(std::iter::repeat_n(0, PIXELS));
        let mut labels = header(LABEL_MAGIC, &[1]);
        labels.push(12);
        assert!(matches!(
            Dataset::from_idx(&images, &labels, DatasetKind::Mnist),
            Err(Error::LabelOutOfRange { label: 12, class_count: 10 })
        ));
    }

    #[test]
    fn orient_single_pixel() {
        assert_eq!(orient_emnist(&Image::zeros()), Image::zeros());
        let mut img = Image::zeros();
        img.set(3, 17, 255);
        let out = orient_emnist(&img);
        assert_eq!(out.get(17, 3), 255);
        assert_eq!(out.0.iter().filter(|&&p| p > 0).count(), 1);
        assert_eq!(unorient_emnist(&out), img);
    }

    #[test]
    fn emnist_class_names() {
        let names = DatasetKind::EmnistBalanced.class_names();
        assert_eq!(names.len(), 47);
        assert_eq!(names[1], "1");
        assert_eq!(names[14], "E");
        assert_eq!(names[28], "S");
        assert_eq!(names[43], "n");
    }

    #[test]
    fn split_cardinality_and_determinism() {
        let data = toy(10, 2);
        let (train, holdout) = split(&data, 0.8, 7).unwrap();
        assert_eq!((train.len(), holdout.len()), (8, 2));
        for s in train.samples() {
            assert!(!holdout.samples().contains(s));
        }
        let again = split(&data, 0.8, 7).unwrap();
        assert_eq!((train, holdout), again);
    }

    #[test]
    fn split_is_stratified() {
        let data = toy(1000, 10);
        let (train, holdout) = split(&data, 0.5, 3).unwrap();
        assert_eq!(train.support(), vec![50; 10]);
        assert_eq!(holdout.support(), vec![50; 10]);
    }

    #[test]
    fn split_empty() {
        let data = Dataset::new(vec![], vec!["0".into()]).unwrap();
        assert!(matches!(split(&data, 0.5, 0), Err(Error::EmptyDataset)));
    }

    #[test]
    fn subset_exact_size() {
        let data = toy(997, 10);
        let sub = stratified_subset(&data, 300, 1).unwrap();
        assert_eq!(sub.len(), 300);
        assert!(stratified_subset(&data, 998, 1).is_err());
    }
}
