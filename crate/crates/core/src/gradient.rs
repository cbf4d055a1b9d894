//! Gradient images: Sobel magnitude or externally computed boundary maps.

use std::path::Path;

use crate::error::{Error, Result};
use crate::image::GrayImage;
use crate::io;

/// Gradient magnitudes normalised into `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientImage(GrayImage);

impl GradientImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        GrayImage::new(width, height, data).map(Self)
    }

    pub fn as_gray(&self) -> &GrayImage {
        &self.0
    }

    pub fn into_gray(self) -> GrayImage {
        self.0
    }

    pub fn width(&self) -> usize {
        self.0.width()
    }

    pub fn height(&self) -> usize {
        self.0.height()
    }

    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    pub fn data(&self) -> &[f64] {
        self.0.data()
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.0.get(x, y)
    }
}

impl From<GrayImage> for GradientImage {
    fn from(img: GrayImage) -> Self {
        Self(img)
    }
}

/// Unnormalised Sobel magnitude with replicated borders.
pub(crate) fn sobel_magnitude(img: &GrayImage) -> Vec<f64> {
    let (w, h) = img.dims();
    let at = |x: isize, y: isize| {
        let x = x.clamp(0, w as isize - 1) as usize;
        let y = y.clamp(0, h as isize - 1) as usize;
        img.get(x, y)
    };
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let gx = (at(x + 1, y - 1) + 2.0 * at(x + 1, y) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x - 1, y) + at(x - 1, y + 1));
            let gy = (at(x - 1, y + 1) + 2.0 * at(x, y + 1) + at(x + 1, y + 1))
                - (at(x - 1, y - 1) + 2.0 * at(x, y - 1) + at(x + 1, y - 1));
            out.push(gx.hypot(gy));
        }
    }
    out
}

/// Sobel gradient magnitude divided by its global maximum. A flat image
/// yields all zeros.
pub fn sobel_gradient(img: &GrayImage) -> GradientImage {
    let mut mag = sobel_magnitude(img);
    let max = mag.iter().copied().fold(0.0, f64::max);
    if max > 0.0 {
        for v in &mut mag {
            *v = (*v / max).min(1.0);
        }
    }
    GradientImage(GrayImage::from_raw(img.width(), img.height(), mag))
}

/// Loads a gradient map from a PFM (clamped into `[0, 1]`) or a PGM
/// (divided by its maxval).
pub fn load_gradient(path: impl AsRef<Path>) -> Result<GradientImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.starts_with(b"Pf") || bytes.starts_with(b"PF") {
        let (w, h, data) = io::decode_pfm(path, &bytes)?;
        let data = data.into_iter().map(|v| v.clamp(0.0, 1.0)).collect();
        return GradientImage::new(w, h, data);
    }
    if bytes.starts_with(b"P5") {
        return match io::load_image(path)? {
            io::LoadedImage::Gray(g) => Ok(GradientImage(g)),
            io::LoadedImage::Color(_) => unreachable!("P5 decodes to gray"),
        };
    }
    Err(Error::format(
        path,
        "gradient maps must be PFM ('Pf') or binary PGM ('P5')",
    ))
}
