//! Region-based segmentation quality measures: probabilistic Rand index,
//! segmentation covering and variation of information (in bits).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::image::LabelImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub pri: f64,
    pub cv: f64,
    /// Bits.
    pub vi: f64,
}

struct Contingency {
    n: usize,
    joint: HashMap<(u32, u32), usize>,
    rows: HashMap<u32, usize>,
    cols: HashMap<u32, usize>,
}

fn contingency(a: &LabelImage, b: &LabelImage) -> Result<Contingency> {
    if a.dims() != b.dims() {
        return Err(Error::shape(a.dims(), b.dims()));
    }
    a.ensure_complete()?;
    b.ensure_complete()?;
    let mut joint = HashMap::new();
    let mut rows = HashMap::new();
    let mut cols = HashMap::new();
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        *joint.entry((x, y)).or_insert(0) += 1;
        *rows.entry(x).or_insert(0) += 1;
        *cols.entry(y).or_insert(0) += 1;
    }
    Ok(Contingency {
        n: a.labels().len(),
        joint,
        rows,
        cols,
    })
}

fn pairs(c: usize) -> f64 {
    let c = c as f64;
    c * (c - 1.0) / 2.0
}

/// Fraction of unordered pixel pairs on which `a` and `b` agree.
pub fn rand_index(a: &LabelImage, b: &LabelImage) -> Result<f64> {
    let t = contingency(a, b)?;
    let total = pairs(t.n);
    if total == 0.0 {
        return Ok(1.0);
    }
    let same_both: f64 = t.joint.values().map(|&c| pairs(c)).sum();
    let same_a: f64 = t.rows.values().map(|&c| pairs(c)).sum();
    let same_b: f64 = t.cols.values().map(|&c| pairs(c)).sum();
    // agreements = pairs split in both + pairs joined in both
    let agree = total - same_a - same_b + 2.0 * same_both;
    Ok((agree / total).clamp(0.0, 1.0))
}

fn ensure_some(gts: &[LabelImage]) -> Result<()> {
    if gts.is_empty() {
        return Err(Error::Param("at least one ground truth is required".into()));
    }
    Ok(())
}

fn mean_over(gts: &[LabelImage], f: impl Fn(&LabelImage) -> Result<f64>) -> Result<f64> {
    ensure_some(gts)?;
    let mut sum = 0.0;
    for gt in gts {
        sum += f(gt)?;
    }
    Ok(sum / gts.len() as f64)
}

/// Mean Rand index of `seg` against every ground truth.
pub fn pri(seg: &LabelImage, gts: &[LabelImage]) -> Result<f64> {
    mean_over(gts, |gt| rand_index(seg, gt))
}

/// Covering of `gt` by `seg`: area-weighted best IoU of every ground-truth
/// region with any region of `seg`.
pub fn covering(seg: &LabelImage, gt: &LabelImage) -> Result<f64> {
    let t = contingency(seg, gt)?;
    let mut best: HashMap<u32, f64> = HashMap::new();
    for (&(s, g), &inter) in &t.joint {
        let union = t.rows[&s] + t.cols[&g] - inter;
        let iou = inter as f64 / union as f64;
        let e = best.entry(g).or_insert(0.0);
        *e = e.max(iou);
    }
    let n = t.n as f64;
    let cv = best.iter().map(|(g, iou)| t.cols[g] as f64 / n * iou).sum::<f64>();
    Ok(cv.clamp(0.0, 1.0))
}

pub fn covering_mean(seg: &LabelImage, gts: &[LabelImage]) -> Result<f64> {
    mean_over(gts, |gt| covering(seg, gt))
}

/// `H(a) + H(b) - 2 I(a, b)` in bits.
pub fn vi(a: &LabelImage, b: &LabelImage) -> Result<f64> {
    let t = contingency(a, b)?;
    let n = t.n as f64;
    // per cell: p_xy * (log p_x/p_xy + log p_y/p_xy), exactly zero on
    // identical partitions
    let v: f64 = t
        .joint
        .iter()
        .map(|(&(x, y), &c)| {
            let c = c as f64;
            c / n * ((t.rows[&x] as f64 / c).log2() + (t.cols[&y] as f64 / c).log2())
        })
        .sum();
    Ok(v.max(0.0))
}

pub fn vi_mean(seg: &LabelImage, gts: &[LabelImage]) -> Result<f64> {
    mean_over(gts, |gt| vi(seg, gt))
}

/// All three measures of `seg` against the ground truths.
pub fn evaluate(seg: &LabelImage, gts: &[LabelImage]) -> Result<MetricReport> {
    Ok(MetricReport {
        pri: pri(seg, gts)?,
        cv: covering_mean(seg, gts)?,
        vi: vi_mean(seg, gts)?,
    })
}
