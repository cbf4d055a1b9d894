//! Deterministic synthetic images with known ground-truth partitions.
//!
//! Intensities are multiples of `1/255` so that every image survives an
//! 8-bit round trip through PNG/PGM unchanged.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gradient::GradientImage;
use crate::image::{ColorImage, GrayImage, LabelImage};
use crate::watershed::SegmentInput;

fn quantize(v: f64) -> f64 {
    (v.clamp(0.0, 1.0) * 255.0).round() / 255.0
}

/// Gradient with two Gaussian basins left and right of the vertical centre
/// line; the ridge runs between columns `size/2 - 1` and `size/2`.
///
/// The profile is `1 - bump` shifted down and rescaled so that each basin
/// has a flat zero floor of radius `3 * size / 16`. Flat floors make the
/// basins stable under reconstruction at small scales.
pub fn two_basin(size: usize) -> GradientImage {
    let sigma = size as f64 / 5.0;
    let cy = (size as f64 - 1.0) / 2.0;
    let centers = [size as f64 / 4.0 - 0.5, 3.0 * size as f64 / 4.0 - 0.5];
    let floor_radius = 3.0 * size as f64 / 16.0;
    let bump = |d2: f64| (-d2 / (2.0 * sigma * sigma)).exp();
    let floor = 1.0 - bump(floor_radius * floor_radius);
    let data = (0..size * size)
        .map(|i| {
            let (x, y) = ((i % size) as f64, (i / size) as f64);
            let b = centers
                .iter()
                .map(|cx| bump((x - cx).powi(2) + (y - cy).powi(2)))
                .fold(0.0, f64::max);
            quantize((1.0 - b - floor) / (1.0 - floor))
        })
        .collect();
    GradientImage::new(size, size, data).expect("values are quantised into [0, 1]")
}

pub fn two_basin_truth(size: usize) -> LabelImage {
    LabelImage::new(
        size,
        size,
        (0..size * size)
            .map(|i| if i % size < size / 2 { 1 } else { 2 })
            .collect(),
    )
    .expect("dimensions match")
}

fn quadrant_index(x: usize, y: usize, size: usize) -> u32 {
    let right = (x >= size / 2) as u32;
    let bottom = (y >= size / 2) as u32;
    1 + right + 2 * bottom
}

pub fn quadrant_truth(size: usize) -> LabelImage {
    LabelImage::new(
        size,
        size,
        (0..size * size)
            .map(|i| quadrant_index(i % size, i / size, size))
            .collect(),
    )
    .expect("dimensions match")
}

/// Gradient made of four flat zero quadrants separated by a cross of
/// maximal-gradient bands `size / 6` pixels wide.
pub fn checkerboard(size: usize) -> GradientImage {
    let band = (size / 6).max(1);
    let lo = size / 2 - band / 2;
    let hi = lo + band;
    let on_band = |v: usize| (lo..hi).contains(&v);
    let data = (0..size * size)
        .map(|i| {
            if on_band(i % size) || on_band(i / size) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    GradientImage::new(size, size, data).expect("binary values")
}

fn ramp(v: usize, size: usize, width: usize) -> usize {
    // integer ramp position 0..=width across the centre line
    let start = size / 2 - width / 2;
    v.saturating_sub(start).min(width)
}

/// Grayscale image of four flat quadrants joined by linear ramps `size / 6`
/// pixels wide. Quadrant codes are 32, 96, 160 and 224 (out of 255).
pub fn four_quadrant(size: usize) -> GrayImage {
    let width = (size / 6).max(2);
    GrayImage::from_fn(size, size, |x, y| {
        let sx = ramp(x, size, width) as f64 / width as f64;
        let sy = ramp(y, size, width) as f64 / width as f64;
        quantize((32.0 + 64.0 * sx + 128.0 * sy) / 255.0)
    })
    .expect("values are quantised into [0, 1]")
}

/// Stripe colours, each used twice.
pub const PLANTED_COLORS: [[f64; 3]; 3] = [
    [230.0 / 255.0, 51.0 / 255.0, 51.0 / 255.0],
    [51.0 / 255.0, 179.0 / 255.0, 51.0 / 255.0],
    [51.0 / 255.0, 51.0 / 255.0, 230.0 / 255.0],
];

/// Stripe geometry of [`planted_color`].
pub const PLANTED_STRIPES: usize = 6;
pub const PLANTED_STRIPE_WIDTH: usize = 32;
pub const PLANTED_HEIGHT: usize = 48;
const PLANTED_RAMP: usize = 8;

/// Six vertical stripes coloured A B C A B C, joined by linear colour ramps,
/// with uniform noise of amplitude `noise` (in 1/255 steps) drawn from `seed`.
pub fn planted_color(seed: u64, noise: u8) -> ColorImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = PLANTED_STRIPES * PLANTED_STRIPE_WIDTH;
    ColorImage::from_fn(width, PLANTED_HEIGHT, |x, _| {
        let stripe = x / PLANTED_STRIPE_WIDTH;
        let local = x % PLANTED_STRIPE_WIDTH;
        let half = PLANTED_RAMP / 2;
        let own = PLANTED_COLORS[stripe % 3];
        // position along the ramp centred on each stripe boundary
        let (other, t) = if local < half && stripe > 0 {
            (
                PLANTED_COLORS[(stripe - 1) % 3],
                (half - local) as f64 / PLANTED_RAMP as f64,
            )
        } else if local >= PLANTED_STRIPE_WIDTH - half && stripe + 1 < PLANTED_STRIPES {
            (
                PLANTED_COLORS[(stripe + 1) % 3],
                (local + half + 1 - PLANTED_STRIPE_WIDTH) as f64 / PLANTED_RAMP as f64,
            )
        } else {
            (own, 0.0)
        };
        std::array::from_fn(|c| {
            let jitter = if noise > 0 {
                rng.gen_range(-(noise as i32)..=noise as i32) as f64 / 255.0
            } else {
                0.0
            };
            quantize(own[c] * (1.0 - t) + other[c] * t + jitter)
        })
    })
    .expect("values are quantised into [0, 1]")
}

pub fn planted_stripes_truth() -> LabelImage {
    let width = PLANTED_STRIPES * PLANTED_STRIPE_WIDTH;
    LabelImage::new(
        width,
        PLANTED_HEIGHT,
        (0..width * PLANTED_HEIGHT)
            .map(|i| (i % width / PLANTED_STRIPE_WIDTH) as u32 + 1)
            .collect(),
    )
    .expect("dimensions match")
}

/// Ground truth grouping stripes by colour (labels 1..=3).
pub fn planted_color_truth() -> LabelImage {
    let width = PLANTED_STRIPES * PLANTED_STRIPE_WIDTH;
    LabelImage::new(
        width,
        PLANTED_HEIGHT,
        (0..width * PLANTED_HEIGHT)
            .map(|i| (i % width / PLANTED_STRIPE_WIDTH % 3) as u32 + 1)
            .collect(),
    )
    .expect("dimensions match")
}

/// One synthetic test image with its reference partition.
#[derive(Debug, Clone)]
pub struct Sample {
    pub name: &'static str,
    pub input: SegmentInput,
    pub truth: LabelImage,
}

/// The standard synthetic corpus. `seed` drives the colour noise.
pub fn corpus(seed: u64) -> Vec<Sample> {
    vec![
        Sample {
            name: "two_basin",
            input: SegmentInput::Gradient(two_basin(32)),
            truth: two_basin_truth(32),
        },
        Sample {
            name: "four_quadrant",
            input: SegmentInput::Gray(four_quadrant(48)),
            truth: quadrant_truth(48),
        },
        Sample {
            name: "checkerboard",
            input: SegmentInput::Gradient(checkerboard(48)),
            truth: quadrant_truth(48),
        },
        Sample {
            name: "planted_color",
            input: SegmentInput::Color(planted_color(seed, 2)),
            truth: planted_stripes_truth(),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(planted_color(5, 2), planted_color(5, 2));
        assert_ne!(planted_color(5, 2), planted_color(6, 2));
        assert_eq!(two_basin(32), two_basin(32));
    }

    #[test]
    fn truths_have_expected_label_counts() {
        assert_eq!(two_basin_truth(32).num_labels(), 2);
        assert_eq!(quadrant_truth(48).num_labels(), 4);
        assert_eq!(planted_stripes_truth().num_labels(), 6);
        assert_eq!(planted_color_truth().num_labels(), 3);
    }

    #[test]
    fn four_quadrant_is_piecewise_linear() {
        let img = four_quadrant(48);
        assert_eq!(img.get(0, 0), 32.0 / 255.0);
        assert_eq!(img.get(47, 0), 96.0 / 255.0);
        assert_eq!(img.get(0, 47), 160.0 / 255.0);
        assert_eq!(img.get(47, 47), 224.0 / 255.0);
    }

    #[test]
    fn two_basin_is_symmetric() {
        let g = two_basin(32);
        for y in 0..32 {
            for x in 0..16 {
                assert_eq!(g.get(x, y), g.get(31 - x, y));
            }
        }
    }
}
