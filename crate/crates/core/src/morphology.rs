//! Flat grayscale morphology and geodesic reconstruction.
//!
//! Borders are handled by neighbourhood truncation: out-of-bounds neighbours
//! are ignored rather than padded. The elementary geodesic step used by the
//! reconstructions is the radius-1 disk (centre plus 4-neighbours).

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::image::GrayImage;

/// Flat disk-shaped structuring element: `(dx, dy)` belongs to the element
/// iff `dx² + dy² ≤ radius²`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuringElement {
    radius: usize,
    offsets: Vec<(isize, isize)>,
    /// One `(dy, half_width)` entry per row of the disk.
    spans: Vec<(isize, usize)>,
}

impl StructuringElement {
    pub fn disk(radius: usize) -> Self {
        let r = radius as isize;
        let r2 = r * r;
        let mut offsets = Vec::new();
        let mut spans = Vec::with_capacity(2 * radius + 1);
        for dy in -r..=r {
            let mut half = 0;
            while (half + 1) * (half + 1) + dy * dy <= r2 {
                half += 1;
            }
            spans.push((dy, half as usize));
            offsets.extend((-half..=half).map(|dx| (dx, dy)));
        }
        Self { radius, offsets, spans }
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// All `(dx, dy)` displacements, row by row.
    pub fn offsets(&self) -> &[(isize, isize)] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn contains(&self, dx: isize, dy: isize) -> bool {
        let r = self.radius as isize;
        dx * dx + dy * dy <= r * r
    }
}

#[inline]
fn better<const MAX: bool>(a: f64, b: f64) -> bool {
    if MAX {
        a > b
    } else {
        a < b
    }
}

/// Sliding-window extremum over `row[x - half ..= x + half]`, truncated at the
/// row ends. Monotonic deque, O(n).
fn row_extremum<const MAX: bool>(row: &[f64], half: usize, out: &mut [f64], deque: &mut VecDeque<usize>) {
    let n = row.len();
    deque.clear();
    for j in 0..n + half {
        if j < n {
            while deque.back().is_some_and(|&b| !better::<MAX>(row[b], row[j])) {
                deque.pop_back();
            }
            deque.push_back(j);
        }
        if j >= half {
            let x = j - half;
            while deque.front().is_some_and(|&f| f + half < x) {
                deque.pop_front();
            }
            out[x] = row[*deque.front().expect("window is never empty")];
        }
    }
}

fn flat_filter<const MAX: bool>(data: &[f64], width: usize, height: usize, se: &StructuringElement) -> Vec<f64> {
    if data.is_empty() {
        return Vec::new();
    }
    let identity = if MAX { f64::NEG_INFINITY } else { f64::INFINITY };
    let mut out = vec![identity; data.len()];
    let mut filtered: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut deque = VecDeque::new();
    for &(dy, half) in &se.spans {
        if dy.unsigned_abs() >= height {
            continue;
        }
        let half = half.min(width - 1);
        let rows = filtered.entry(half).or_insert_with(|| {
            let mut buf = vec![0.0; data.len()];
            for (src, dst) in data.chunks_exact(width).zip(buf.chunks_exact_mut(width)) {
                row_extremum::<MAX>(src, half, dst, &mut deque);
            }
            buf
        });
        for y in 0..height {
            let yy = y as isize + dy;
            if yy < 0 || yy >= height as isize {
                continue;
            }
            let src = &rows[yy as usize * width..][..width];
            let dst = &mut out[y * width..][..width];
            for (o, &v) in dst.iter_mut().zip(src) {
                if better::<MAX>(v, *o) {
                    *o = v;
                }
            }
        }
    }
    out
}

/// Flat dilation: pointwise maximum over the structuring element.
pub fn dilate(img: &GrayImage, se: &StructuringElement) -> GrayImage {
    let (w, h) = img.dims();
    GrayImage::from_raw(w, h, flat_filter::<true>(img.data(), w, h, se))
}

/// Flat erosion: pointwise minimum over the structuring element.
pub fn erode(img: &GrayImage, se: &StructuringElement) -> GrayImage {
    let (w, h) = img.dims();
    GrayImage::from_raw(w, h, flat_filter::<false>(img.data(), w, h, se))
}

fn check_order(marker: &GrayImage, mask: &GrayImage, below: bool) -> Result<()> {
    mask.ensure_same_dims(marker.dims())?;
    let w = marker.width();
    let bad = marker
        .data()
        .iter()
        .zip(mask.data())
        .position(|(&f, &g)| if below { f > g } else { f < g });
    match bad {
        None => Ok(()),
        Some(i) => Err(Error::Precondition {
            x: i % w,
            y: i / w,
            message: format!(
                "marker {} is {} mask {}",
                marker.data()[i],
                if below { "above" } else { "below" },
                mask.data()[i]
            ),
        }),
    }
}

/// Hybrid raster-scan + FIFO reconstruction by dilation (4-connected).
///
/// `marker` must be pointwise `<= mask`; both have `width * height` samples.
fn reconstruct_dilation_raw(mut marker: Vec<f64>, mask: &[f64], width: usize, height: usize) -> Vec<f64> {
    let j = &mut marker;
    let idx = |x: usize, y: usize| y * width + x;

    for y in 0..height {
        for x in 0..width {
            let p = idx(x, y);
            let mut v = j[p];
            if x > 0 {
                v = v.max(j[p - 1]);
            }
            if y > 0 {
                v = v.max(j[p - width]);
            }
            j[p] = v.min(mask[p]);
        }
    }

    let mut queue = VecDeque::new();
    for y in (0..height).rev() {
        for x in (0..width).rev() {
            let p = idx(x, y);
            let mut v = j[p];
            if x + 1 < width {
                v = v.max(j[p + 1]);
            }
            if y + 1 < height {
                v = v.max(j[p + width]);
            }
            let v = v.min(mask[p]);
            j[p] = v;
            let pending = |q: usize| j[q] < v && j[q] < mask[q];
            if (x + 1 < width && pending(p + 1)) || (y + 1 < height && pending(p + width)) {
                queue.push_back(p);
            }
        }
    }

    while let Some(p) = queue.pop_front() {
        let (x, y) = (p % width, p / width);
        let v = j[p];
        let mut visit = |q: usize| {
            if j[q] < v && mask[q] != j[q] {
                j[q] = v.min(mask[q]);
                queue.push_back(q);
            }
        };
        if x > 0 {
            visit(p - 1);
        }
        if x + 1 < width {
            visit(p + 1);
        }
        if y > 0 {
            visit(p - width);
        }
        if y + 1 < height {
            visit(p + width);
        }
    }
    marker
}

/// Reconstruction by erosion through negation, which is exact in floating
/// point: `R^ε_g(f) = -R^δ_{-g}(-f)`.
fn reconstruct_erosion_raw(marker: &[f64], mask: &[f64], width: usize, height: usize) -> Vec<f64> {
    let neg_marker = marker.iter().map(|v| -v).collect();
    let neg_mask: Vec<f64> = mask.iter().map(|v| -v).collect();
    reconstruct_dilation_raw(neg_marker, &neg_mask, width, height)
        .into_iter()
        .map(|v| -v)
        .collect()
}

/// Reconstruction by dilation of `mask` from `marker` (`marker <= mask`):
/// the stable limit of repeated elementary geodesic dilations.
pub fn reconstruct_dilation(marker: &GrayImage, mask: &GrayImage) -> Result<GrayImage> {
    check_order(marker, mask, true)?;
    let (w, h) = mask.dims();
    Ok(GrayImage::from_raw(
        w,
        h,
        reconstruct_dilation_raw(marker.data().to_vec(), mask.data(), w, h),
    ))
}

/// Reconstruction by erosion of `mask` from `marker` (`marker >= mask`).
pub fn reconstruct_erosion(marker: &GrayImage, mask: &GrayImage) -> Result<GrayImage> {
    check_order(marker, mask, false)?;
    let (w, h) = mask.dims();
    Ok(GrayImage::from_raw(
        w,
        h,
        reconstruct_erosion_raw(marker.data(), mask.data(), w, h),
    ))
}

/// One elementary geodesic dilation: `δ(marker) ∧ mask` with the radius-1 disk.
pub fn geodesic_dilation(marker: &GrayImage, mask: &GrayImage) -> Result<GrayImage> {
    mask.ensure_same_dims(marker.dims())?;
    let d = dilate(marker, &StructuringElement::disk(1));
    let data = d.data().iter().zip(mask.data()).map(|(a, b)| a.min(*b)).collect();
    Ok(GrayImage::from_raw(mask.width(), mask.height(), data))
}

/// One elementary geodesic erosion: `ε(marker) ∨ mask` with the radius-1 disk.
pub fn geodesic_erosion(marker: &GrayImage, mask: &GrayImage) -> Result<GrayImage> {
    mask.ensure_same_dims(marker.dims())?;
    let e = erode(marker, &StructuringElement::disk(1));
    let data = e.data().iter().zip(mask.data()).map(|(a, b)| a.max(*b)).collect();
    Ok(GrayImage::from_raw(mask.width(), mask.height(), data))
}

/// `R^φ` at the scale of `se`.
///
/// The erosion-derived marker `ε_se(g)` is first reconstructed by dilation
/// under `g`, giving `r`. The second stage reconstructs by erosion under `r`
/// from the marker `δ_se(r)`. Large disks drive the result to the constant
/// `min(g)`; radius 0 returns `g`.
pub fn closing_by_reconstruction(g: &GrayImage, se: &StructuringElement) -> GrayImage {
    let (w, h) = g.dims();
    let marker = flat_filter::<false>(g.data(), w, h, se);
    let opened = reconstruct_dilation_raw(marker, g.data(), w, h);
    let marker = flat_filter::<true>(&opened, w, h, se);
    GrayImage::from_raw(w, h, reconstruct_erosion_raw(&marker, &opened, w, h))
}

/// `R^γ` at the scale of `se`, the dual of [`closing_by_reconstruction`]:
/// reconstruct by erosion under `g` from `δ_se(g)`, then by dilation under
/// that result from its erosion. Large disks give the constant `max(g)`.
pub fn opening_by_reconstruction(g: &GrayImage, se: &StructuringElement) -> GrayImage {
    let (w, h) = g.dims();
    let marker = flat_filter::<true>(g.data(), w, h, se);
    let closed = reconstruct_erosion_raw(&marker, g.data(), w, h);
    let marker = flat_filter::<false>(&closed, w, h, se);
    GrayImage::from_raw(w, h, reconstruct_dilation_raw(marker, &closed, w, h))
}
