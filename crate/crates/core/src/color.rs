//! Colour conversions: sRGB to CIELAB (D65) and BT.601 luminance.

use crate::image::{ColorImage, GrayImage};

/// D65 reference white, 2° observer.
const WHITE: [f64; 3] = [0.95047, 1.0, 1.08883];

const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

fn srgb_to_linear(c: f64) -> f64 {
    if c <= 0.040_45 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// Converts one sRGB triple (channels in `[0, 1]`) to `(L, a, b)`.
pub fn srgb_pixel_to_lab(rgb: [f64; 3]) -> [f64; 3] {
    let lin = rgb.map(srgb_to_linear);
    let xyz: [f64; 3] = std::array::from_fn(|row| SRGB_TO_XYZ[row].iter().zip(lin.iter()).map(|(m, c)| m * c).sum());
    let fx = lab_f(xyz[0] / WHITE[0]);
    let fy = lab_f(xyz[1] / WHITE[1]);
    let fz = lab_f(xyz[2] / WHITE[2]);
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Per-pixel CIELAB values in raster order.
pub fn rgb_to_lab(img: &ColorImage) -> Vec<[f64; 3]> {
    img.data().iter().map(|&px| srgb_pixel_to_lab(px)).collect()
}

/// BT.601 luma, clamped to `[0, 1]`.
pub fn to_gray(img: &ColorImage) -> GrayImage {
    let data = img
        .data()
        .iter()
        .map(|&[r, g, b]| (0.299 * r + 0.587 * g + 0.114 * b).clamp(0.0, 1.0))
        .collect();
    GrayImage::from_raw(img.width(), img.height(), data)
}
