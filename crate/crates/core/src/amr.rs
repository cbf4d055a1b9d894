//! Adaptive morphological reconstruction.
//!
//! `ψ(g, s, m)` is the pointwise maximum of closings-by-reconstruction of
//! the gradient `g` over disks of radius `s..=m`. Scales are visited in
//! ascending order and the loop stops early once the largest per-pixel
//! change `J` between consecutive partial maxima drops to `eta` or below.

use crate::error::{Error, Result};
use crate::gradient::GradientImage;
use crate::image::GrayImage;
use crate::morphology::{closing_by_reconstruction, StructuringElement};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmrParams {
    /// Smallest disk radius.
    pub s: usize,
    /// Largest disk radius (hard cap on the iteration).
    pub m: usize,
    /// Early-stop threshold on the convergence gap; `0` runs every scale.
    pub eta: f64,
}

impl Default for AmrParams {
    fn default() -> Self {
        Self { s: 2, m: 50, eta: 1e-4 }
    }
}

impl AmrParams {
    pub fn new(s: usize, m: usize, eta: f64) -> Result<Self> {
        let p = Self { s, m, eta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.s < 1 {
            return Err(Error::Param(format!("s must be >= 1, got {}", self.s)));
        }
        if self.m < self.s {
            return Err(Error::Param(format!("m must be >= s, got s={} m={}", self.s, self.m)));
        }
        if !self.eta.is_finite() || self.eta < 0.0 {
            return Err(Error::Param(format!("eta must be >= 0, got {}", self.eta)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmrResult {
    pub psi: GradientImage,
    /// Largest radius folded into `psi`.
    pub iterations_used: usize,
    /// `J` per visited scale; the first entry is `max(psi)` at scale `s`.
    pub gap_history: Vec<f64>,
}

/// Largest absolute per-pixel difference between two images.
pub fn convergence_gap(prev: &GradientImage, cur: &GradientImage) -> Result<f64> {
    prev.as_gray().ensure_same_dims(cur.dims())?;
    Ok(prev
        .data()
        .iter()
        .zip(cur.data())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

fn closing_at(g: &GrayImage, radius: usize) -> Vec<f64> {
    closing_by_reconstruction(g, &StructuringElement::disk(radius)).into_data()
}

/// Runs the adaptive reconstruction with early stopping.
///
/// The gap test `J <= eta` is first applied at `i = s + 1`; the initial
/// `J = max(ψ)` at `i = s` is recorded but never stops the loop. `eta = 0`
/// disables early stopping so that every scale up to `m` is folded in.
pub fn amr(g: &GradientImage, params: &AmrParams) -> Result<AmrResult> {
    params.validate()?;
    let gray = g.as_gray();
    let (w, h) = gray.dims();
    let mut psi = closing_at(gray, params.s);
    let mut gap_history = vec![psi.iter().copied().fold(0.0, f64::max)];
    let mut iterations_used = params.s;
    for i in params.s + 1..=params.m {
        let term = closing_at(gray, i);
        let mut gap = 0.0f64;
        for (acc, v) in psi.iter_mut().zip(term) {
            if v > *acc {
                gap = gap.max(v - *acc);
                *acc = v;
            }
        }
        gap_history.push(gap);
        iterations_used = i;
        if params.eta > 0.0 && gap <= params.eta {
            break;
        }
    }
    Ok(AmrResult {
        psi: GradientImage::from(GrayImage::from_raw(w, h, psi)),
        iterations_used,
        gap_history,
    })
}

/// `ψ(g, s, s)`, `ψ(g, s, s + 1)`, …, `ψ(g, s, m)` without early stopping.
///
/// Entry `k` is bit-identical to `amr` with cap `s + k` and `eta = 0` run to
/// completion.
pub fn amr_sequence(g: &GradientImage, s: usize, m: usize) -> Result<Vec<GradientImage>> {
    AmrParams { s, m, eta: 0.0 }.validate()?;
    let gray = g.as_gray();
    let (w, h) = gray.dims();
    let mut out = Vec::with_capacity(m - s + 1);
    let mut psi = closing_at(gray, s);
    out.push(GradientImage::from(GrayImage::from_raw(w, h, psi.clone())));
    for i in s + 1..=m {
        for (acc, v) in psi.iter_mut().zip(closing_at(gray, i)) {
            *acc = acc.max(v);
        }
        out.push(GradientImage::from(GrayImage::from_raw(w, h, psi.clone())));
    }
    Ok(out)
}
