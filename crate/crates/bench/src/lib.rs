//! Shared inputs for the benchmarks.

use morphoseg::{GradientImage, GrayImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth random gradient: a few Gaussian blobs plus quantised noise, so
/// that it has both large basins and many spurious minima.
pub fn natural_gradient(width: usize, height: usize, seed: u64) -> GradientImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blobs: Vec<(f64, f64, f64)> = (0..12)
        .map(|_| {
            (
                rng.gen_range(0.0..width as f64),
                rng.gen_range(0.0..height as f64),
                rng.gen_range(8.0..40.0),
            )
        })
        .collect();
    let data = (0..width * height)
        .map(|i| {
            let (x, y) = ((i % width) as f64, (i / width) as f64);
            let bump = blobs
                .iter()
                .map(|&(cx, cy, s)| (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * s * s)).exp())
                .fold(0.0, f64::max);
            let noise: f64 = rng.gen_range(0.0..0.05);
            (((1.0 - bump) * 0.95 + noise) * 255.0).round() / 255.0
        })
        .collect();
    GradientImage::new(width, height, data).expect("values lie in [0, 1]")
}

/// Uniform random image with 8-bit quantisation.
pub fn random_gray(width: usize, height: usize, seed: u64) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GrayImage::from_fn(width, height, |_, _| rng.gen_range(0..=255) as f64 / 255.0).expect("values lie in [0, 1]")
}
