//! Spectral grouping of an AMR-WT pre-segmentation (AMR-SC).
//!
//! Regions are described by their mean CIELAB colour, compared with a dense
//! Gaussian affinity, embedded with the eigenvectors of the symmetric
//! normalised Laplacian, and grouped by k-means on the row-normalised
//! embedding.

pub mod jacobi;
pub mod kmeans;

use std::collections::HashMap;

use crate::amr::AmrParams;
use crate::color::rgb_to_lab;
use crate::error::{Error, Result};
use crate::image::{ColorImage, LabelImage};
use crate::watershed::{amr_wt, Connectivity, SegmentInput};

pub use jacobi::{symmetric_eigen, SymmetricEigen};
pub use kmeans::{kmeans, KMeans};

const KMEANS_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct RegionFeatures {
    pub region_count: usize,
    /// Indexed by `label - 1`.
    pub mean_lab: Vec<[f64; 3]>,
    pub pixel_count: Vec<usize>,
}

/// Mean CIELAB colour of every region. `seg` must be a complete partition
/// labelled `1..=num_labels`.
pub fn region_features(img: &ColorImage, seg: &LabelImage) -> Result<RegionFeatures> {
    if img.dims() != seg.dims() {
        return Err(Error::shape(img.dims(), seg.dims()));
    }
    seg.ensure_complete()?;
    let n = seg.num_labels();
    if seg.max_label() as usize != n {
        return Err(Error::Param(format!(
            "labels must be contiguous 1..={n}, found label {}",
            seg.max_label()
        )));
    }
    let mut sums = vec![[0.0; 3]; n];
    let mut counts = vec![0usize; n];
    for (lab, &l) in rgb_to_lab(img).into_iter().zip(seg.labels()) {
        let r = l as usize - 1;
        counts[r] += 1;
        for c in 0..3 {
            sums[r][c] += lab[c];
        }
    }
    let mean_lab = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| s.map(|v| v / c as f64))
        .collect();
    Ok(RegionFeatures {
        region_count: n,
        mean_lab,
        pixel_count: counts,
    })
}

/// Dense symmetric affinity with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    pub n: usize,
    /// Row-major `n × n`.
    pub w: Vec<f64>,
}

impl AffinityMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }
}

/// `w(i, j) = exp(-‖lab_i - lab_j‖² / (2σ²))` over all region pairs.
/// Weights that underflow are held at the smallest positive normal value.
pub fn affinity(features: &RegionFeatures, sigma: f64) -> Result<AffinityMatrix> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::Param(format!("sigma must be > 0, got {sigma}")));
    }
    let n = features.region_count;
    let mut w = vec![1.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (features.mean_lab[i], features.mean_lab[j]);
            let d2: f64 = (0..3).map(|c| (a[c] - b[c]).powi(2)).sum();
            let v = (-d2 / (2.0 * sigma * sigma)).exp().max(f64::MIN_POSITIVE);
            w[i * n + j] = v;
            w[j * n + i] = v;
        }
    }
    Ok(AffinityMatrix { n, w })
}

/// `I - D^{-1/2} W D^{-1/2}`.
///
/// The diagonal is formed as `sum_{j != i} w_ij / d_i` rather than
/// `1 - w_ii / d_i`; with unit self-affinity and tiny off-diagonal weights
/// the subtraction would round to zero and push eigenvalues negative.
pub fn normalized_laplacian(w: &AffinityMatrix) -> Vec<f64> {
    let n = w.n;
    let off: Vec<f64> = (0..n)
        .map(|i| (0..n).filter(|&j| j != i).map(|j| w.get(i, j)).sum())
        .collect();
    let degree: Vec<f64> = (0..n).map(|i| off[i] + w.get(i, i)).collect();
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        l[i * n + i] = off[i] / degree[i];
        for j in i + 1..n {
            let v = -w.get(i, j) / (degree[i] * degree[j]).sqrt();
            l[i * n + j] = v;
            l[j * n + i] = v;
        }
    }
    l
}

/// Rows of the `k` eigenvectors with smallest eigenvalues, each scaled to
/// unit length (zero rows are left as they are).
pub fn spectral_embedding(w: &AffinityMatrix, k: usize) -> Result<Vec<Vec<f64>>> {
    let eig = symmetric_eigen(&normalized_laplacian(w), w.n)?;
    Ok((0..w.n)
        .map(|i| {
            let row: Vec<f64> = (0..k).map(|c| eig.vectors[i * w.n + c]).collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > 0.0 {
                row.into_iter().map(|v| v / norm).collect()
            } else {
                row
            }
        })
        .collect())
}

/// Cluster index (`0..k`) for every region.
pub fn spectral_cluster(w: &AffinityMatrix, k: usize, rng_seed: u64) -> Result<Vec<usize>> {
    if k == 0 || k > w.n {
        return Err(Error::Param(format!("k must be in 1..={}, got {k}", w.n)));
    }
    if k == w.n {
        return Ok((0..k).collect());
    }
    if k == 1 {
        return Ok(vec![0; w.n]);
    }
    let rows = spectral_embedding(w, k)?;
    Ok(kmeans(&rows, k, rng_seed, KMEANS_MAX_ITER)?.assignments)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    pub k: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for SpectralParams {
    fn default() -> Self {
        Self {
            k: 2,
            sigma: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AmrScOutput {
    pub presegmentation: LabelImage,
    pub clusters: Vec<usize>,
    pub labels: LabelImage,
}

/// Groups the regions of `presegmentation` into at most `k` clusters by
/// mean colour. Returns the cluster of every region and the merged
/// partition, labelled `1..=k'` in raster order of first appearance
/// (`k' < k` when k-means leaves a cluster empty).
pub fn group_regions(
    img: &ColorImage,
    presegmentation: &LabelImage,
    spectral: &SpectralParams,
) -> Result<(Vec<usize>, LabelImage)> {
    let features = region_features(img, presegmentation)?;
    let k = spectral.k;
    if k == 0 || k > features.region_count {
        return Err(Error::Param(format!(
            "k must be in 1..={} (pre-segmentation regions), got {k}",
            features.region_count
        )));
    }
    let w = affinity(&features, spectral.sigma)?;
    let clusters = spectral_cluster(&w, k, spectral.seed)?;
    let mut remap: HashMap<usize, u32> = HashMap::new();
    let labels = presegmentation
        .labels()
        .iter()
        .map(|&l| {
            let c = clusters[l as usize - 1];
            let next = remap.len() as u32 + 1;
            *remap.entry(c).or_insert(next)
        })
        .collect();
    let labels = LabelImage::new(img.width(), img.height(), labels)?;
    Ok((clusters, labels))
}

/// AMR-WT pre-segmentation followed by spectral grouping of its regions.
pub fn amr_sc_detailed(
    img: &ColorImage,
    params: &AmrParams,
    spectral: &SpectralParams,
    conn: Connectivity,
) -> Result<AmrScOutput> {
    let presegmentation = amr_wt(&SegmentInput::Color(img.clone()), params, conn)?;
    let (clusters, labels) = group_regions(img, &presegmentation, spectral)?;
    Ok(AmrScOutput {
        presegmentation,
        clusters,
        labels,
    })
}

pub fn amr_sc(
    img: &ColorImage,
    params: &AmrParams,
    spectral: &SpectralParams,
    conn: Connectivity,
) -> Result<LabelImage> {
    amr_sc_detailed(img, params, spectral, conn).map(|o| o.labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn block_affinity(cross: f64) -> AffinityMatrix {
        let n = 10;
        let w = (0..n * n)
            .map(|i| if (i / n < 5) == (i % n < 5) { 1.0 } else { cross })
            .collect();
        AffinityMatrix { n, w }
    }

    #[test]
    fn features_of_uniform_halves() {
        let img = ColorImage::from_fn(4, 2, |x, _| if x < 2 { [0.5; 3] } else { [1.0, 0.0, 0.0] }).unwrap();
        let seg = LabelImage::new(4, 2, vec![1, 1, 2, 2, 1, 1, 2, 2]).unwrap();
        let f = region_features(&img, &seg).unwrap();
        assert_eq!(f.region_count, 2);
        assert_eq!(f.pixel_count, vec![4, 4]);
        assert!(f.mean_lab[0][1].abs() < 0.01 && f.mean_lab[0][2].abs() < 0.01);
        let red = crate::color::srgb_pixel_to_lab([1.0, 0.0, 0.0]);
        assert!(f.mean_lab[1].iter().zip(red).all(|(a, b)| (a - b).abs() < 1e-9));
        let wrong = LabelImage::new(2, 2, vec![1; 4]).unwrap();
        assert!(matches!(region_features(&img, &wrong), Err(Error::Shape { .. })));
    }

    #[test]
    fn features_match_accumulation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let img = ColorImage::from_fn(9, 7, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap();
        let seg = LabelImage::new(9, 7, (0..63).map(|_| rng.gen_range(1..=4)).collect()).unwrap();
        let f = region_features(&img, &seg).unwrap();
        assert_eq!(f.pixel_count.iter().sum::<usize>(), 63);
        for r in 1..=4u32 {
            let members: Vec<[f64; 3]> = (0..63)
                .filter(|&i| seg.labels()[i] == r)
                .map(|i| crate::color::srgb_pixel_to_lab(img.data()[i]))
                .collect();
            for c in 0..3 {
                let mean = members.iter().map(|m| m[c]).sum::<f64>() / members.len() as f64;
                assert!((f.mean_lab[r as usize - 1][c] - mean).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn affinity_examples() {
        let same = RegionFeatures {
            region_count: 3,
            mean_lab: vec![[50.0, 1.0, 2.0]; 3],
            pixel_count: vec![1; 3],
        };
        assert!(affinity(&same, 1.0).unwrap().w.iter().all(|&v| v == 1.0));
        let pair = RegionFeatures {
            region_count: 2,
            mean_lab: vec![[0.0, 0.0, 0.0], [1.0, 1.0, 0.0]],
            pixel_count: vec![1; 2],
        };
        let w = affinity(&pair, 1.0).unwrap();
        assert!((w.get(0, 1) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((w.get(0, 1) - 0.3679).abs() < 1e-4);
        assert!(affinity(&pair, 0.0).is_err());
        assert!(affinity(&pair, -1.0).is_err());
    }

    #[test]
    fn affinity_matches_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(52);
        let f = RegionFeatures {
            region_count: 5,
            mean_lab: (0..5)
                .map(|_| {
                    [
                        rng.gen_range(0.0..3.0),
                        rng.gen_range(-2.0..2.0),
                        rng.gen_range(-2.0..2.0),
                    ]
                })
                .collect(),
            pixel_count: vec![1; 5],
        };
        let sigma = 1.5;
        let w = affinity(&f, sigma).unwrap();
        for i in 0..5 {
            for j in 0..5 {
                let d2: f64 = (0..3).map(|c| (f.mean_lab[i][c] - f.mean_lab[j][c]).powi(2)).sum();
                assert!((w.get(i, j) - (-d2 / (2.0 * sigma * sigma)).exp()).abs() < 1e-15);
                assert_eq!(w.get(i, j), w.get(j, i));
                assert!(w.get(i, j) > 0.0 && w.get(i, j) <= 1.0);
            }
        }
    }

    #[test]
    fn laplacian_spectrum_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..10 {
            let f = RegionFeatures {
                region_count: 12,
                mean_lab: (0..12)
                    .map(|_| [rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0), 0.0])
                    .collect(),
                pixel_count: vec![1; 12],
            };
            let w = affinity(&f, 1.0).unwrap();
            let eig = symmetric_eigen(&normalized_laplacian(&w), 12).unwrap();
            assert!(eig.values[0].abs() < 1e-8, "{}", eig.values[0]);
            assert!(eig.values.iter().all(|&v| v > -1e-12 && v < 2.0 + 1e-12));
        }
    }

    #[test]
    fn planted_blocks_recovered() {
        let w = block_affinity((-50.0f64).exp());
        for seed in 0..10 {
            let c = spectral_cluster(&w, 2, seed).unwrap();
            assert!(c[..5].iter().all(|&v| v == c[0]));
            assert!(c[5..].iter().all(|&v| v == c[5]));
            assert_ne!(c[0], c[5]);
        }
    }

    #[test]
    fn trivial_cluster_counts() {
        let w = block_affinity(0.3);
        assert_eq!(spectral_cluster(&w, 10, 0).unwrap(), (0..10).collect::<Vec<_>>());
        assert_eq!(spectral_cluster(&w, 1, 0).unwrap(), vec![0; 10]);
        assert!(spectral_cluster(&w, 11, 0).is_err());
        assert!(spectral_cluster(&w, 0, 0).is_err());
    }

    #[test]
    fn planted_colors_grouped() {
        let params = AmrParams::new(2, 50, 1e-4).unwrap();
        let truth = synthetic::planted_color_truth();
        let w = synthetic::PLANTED_STRIPE_WIDTH;
        // noise fragments the ramps into small regions whose mean colours sit
        // several Lab units from their stripe; σ = 1 isolates those, so the
        // noisy cases use a wider kernel
        let cases = [(0, 3, 1.0), (2, 0, 10.0), (2, 1, 10.0), (2, 4, 10.0), (2, 7, 10.0)];
        for (noise, seed, sigma) in cases {
            let img = synthetic::planted_color(seed, noise);
            let spectral = SpectralParams { k: 3, sigma, seed };
            let out = amr_sc_detailed(&img, &params, &spectral, Connectivity::Eight).unwrap();
            if noise == 0 {
                assert_eq!(out.presegmentation.num_labels(), 6);
            }
            assert_eq!(out.labels.num_labels(), 3);
            // boundaries fall somewhere inside the 8 px colour ramps
            assert!(crate::metrics::rand_index(&out.labels, &truth).unwrap() > 0.9);
            // stripe centres share a cluster exactly when they share a colour
            for s in 0..6 {
                for t in 0..6 {
                    let a = out.labels.get(s * w + w / 2, 20);
                    let b = out.labels.get(t * w + w / 2, 20);
                    assert_eq!(a == b, s % 3 == t % 3, "noise {noise} seed {seed}");
                }
            }
        }
    }

    #[test]
    fn k_one_and_k_equal_regions() {
        let img = synthetic::planted_color(7, 0);
        let params = AmrParams::new(2, 50, 1e-4).unwrap();
        let one = amr_sc(
            &img,
            &params,
            &SpectralParams {
                k: 1,
                sigma: 1.0,
                seed: 0,
            },
            Connectivity::Eight,
        )
        .unwrap();
        assert_eq!(one.num_labels(), 1);
        let out = amr_sc_detailed(
            &img,
            &params,
            &SpectralParams {
                k: 6,
                sigma: 1.0,
                seed: 0,
            },
            Connectivity::Eight,
        )
        .unwrap();
        assert!(out.labels.same_partition(&out.presegmentation));
        assert!(amr_sc(
            &img,
            &params,
            &SpectralParams {
                k: 7,
                sigma: 1.0,
                seed: 0
            },
            Connectivity::Eight
        )
        .is_err());
    }
}
