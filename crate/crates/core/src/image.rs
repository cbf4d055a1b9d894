//! Image containers shared by every stage of the pipeline.
//!
//! All intensity images store `f64` samples in `[0, 1]`, row-major. Label
//! images store `u32` region identifiers where `0` means "unassigned".

use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};

fn check_len(width: usize, height: usize, len: usize) -> Result<()> {
    match width.checked_mul(height) {
        Some(n) if n == len => Ok(()),
        _ => Err(Error::InvalidData(format!(
            "buffer of {len} samples does not match {width}x{height}"
        ))),
    }
}

fn check_unit(v: f64, idx: usize) -> Result<()> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidData(format!(
            "sample {v} at index {idx} is outside [0, 1]"
        )))
    }
}

/// Single-channel intensity image with samples in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_len(width, height, data.len())?;
        for (i, &v) in data.iter().enumerate() {
            check_unit(v, i)?;
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image from `f(x, y)`. Values must lie in `[0, 1]`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    /// Internal constructor for buffers produced by operators that only
    /// select, clamp or average existing samples.
    pub(crate) fn from_raw(width: usize, height: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(width * height, data.len());
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn min_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pointwise `1 - v`.
    pub fn complement(&self) -> Self {
        Self::from_raw(self.width, self.height, self.data.iter().map(|v| 1.0 - v).collect())
    }

    pub(crate) fn ensure_same_dims(&self, other: (usize, usize)) -> Result<()> {
        if self.dims() == other {
            Ok(())
        } else {
            Err(Error::shape(self.dims(), other))
        }
    }
}

/// Three-channel RGB image, each channel in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorImage {
    width: usize,
    height: usize,
    data: Vec<[f64; 3]>,
}

impl ColorImage {
    pub fn new(width: usize, height: usize, data: Vec<[f64; 3]>) -> Result<Self> {
        check_len(width, height, data.len())?;
        for (i, px) in data.iter().enumerate() {
            for &c in px {
                check_unit(c, i)?;
            }
        }
        Ok(Self { width, height, data })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> [f64; 3]) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[[f64; 3]] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> [f64; 3] {
        self.data[y * self.width + x]
    }
}

/// A partition of the pixel grid into labelled regions.
///
/// Label `0` is reserved for "unassigned"; a complete partition has none.
/// `num_labels` counts the distinct positive labels present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelImage {
    width: usize,
    height: usize,
    labels: Vec<u32>,
    num_labels: usize,
}

impl LabelImage {
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        check_len(width, height, labels.len())?;
        let num_labels = labels.iter().filter(|&&l| l != 0).collect::<HashSet<_>>().len();
        Ok(Self {
            width,
            height,
            labels,
            num_labels,
        })
    }

    /// Constructor for labels known to be exactly `1..=num_labels` (plus zeros).
    pub(crate) fn from_raw(width: usize, height: usize, labels: Vec<u32>, num_labels: usize) -> Self {
        debug_assert_eq!(width * height, labels.len());
        Self {
            width,
            height,
            labels,
            num_labels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.labels[y * self.width + x]
    }

    pub fn max_label(&self) -> u32 {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    pub fn unassigned(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 0).count()
    }

    pub fn is_complete(&self) -> bool {
        self.unassigned() == 0
    }

    pub fn ensure_complete(&self) -> Result<()> {
        match self.unassigned() {
            0 => Ok(()),
            unassigned => Err(Error::IncompletePartition { unassigned }),
        }
    }

    /// Renumbers positive labels to `1..=k` in raster order of first
    /// appearance. Zeros stay zero.
    pub fn relabeled(&self) -> Self {
        let mut map = HashMap::new();
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if l == 0 {
                    0
                } else {
                    let next = map.len() as u32 + 1;
                    *map.entry(l).or_insert(next)
                }
            })
            .collect();
        Self::from_raw(self.width, self.height, labels, map.len())
    }

    /// True when both images describe the same partition up to renaming.
    pub fn same_partition(&self, other: &LabelImage) -> bool {
        self.dims() == other.dims() && self.relabeled().labels == other.relabeled().labels
    }

    /// Pixel counts indexed by label; entry 0 counts unassigned pixels.
    pub fn histogram(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.max_label() as usize + 1];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// Pixels with a 4-neighbour carrying a different label.
    pub fn boundary_mask(&self) -> Vec<bool> {
        let (w, h) = self.dims();
        let mut mask = vec![false; w * h];
        for y in 0..h {
            for x in 0..w {
                let l = self.get(x, y);
                let differs = (x + 1 < w && self.get(x + 1, y) != l)
                    || (x > 0 && self.get(x - 1, y) != l)
                    || (y + 1 < h && self.get(x, y + 1) != l)
                    || (y > 0 && self.get(x, y - 1) != l);
                mask[y * w + x] = differs;
            }
        }
        mask
    }
}
