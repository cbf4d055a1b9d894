//! Seed extraction and marker-driven watershed flooding.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::amr::{amr, AmrParams, AmrResult};
use crate::color::to_gray;
use crate::error::{Error, Result};
use crate::gradient::{sobel_gradient, GradientImage};
use crate::image::{ColorImage, GrayImage, LabelImage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Connectivity {
    Four,
    #[default]
    Eight,
}

impl Connectivity {
    fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        const EIGHT: [(isize, isize); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }

    pub(crate) fn for_each_neighbor(self, p: usize, width: usize, height: usize, mut f: impl FnMut(usize)) {
        let (x, y) = ((p % width) as isize, (p / width) as isize);
        for &(dx, dy) in self.offsets() {
            let (qx, qy) = (x + dx, y + dy);
            if qx >= 0 && qy >= 0 && (qx as usize) < width && (qy as usize) < height {
                f(qy as usize * width + qx as usize);
            }
        }
    }
}

impl std::str::FromStr for Connectivity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "4" => Ok(Connectivity::Four),
            "8" => Ok(Connectivity::Eight),
            other => Err(Error::Param(format!("connectivity must be 4 or 8, got {other}"))),
        }
    }
}

/// Labels every regional minimum plateau of `g`.
///
/// A plateau is a maximal connected set of equal-valued pixels; it is a
/// regional minimum when no neighbouring pixel is lower. Minima are numbered
/// `1..=K` in raster order of their first pixel; other pixels get `0`.
pub fn regional_minima(g: &GradientImage, conn: Connectivity) -> LabelImage {
    let (w, h) = g.dims();
    let data = g.data();
    let mut labels = vec![0u32; w * h];
    let mut visited = vec![false; w * h];
    let mut plateau = Vec::new();
    let mut queue = VecDeque::new();
    let mut count = 0u32;
    for start in 0..w * h {
        if visited[start] {
            continue;
        }
        let v = data[start];
        let mut is_min = true;
        plateau.clear();
        visited[start] = true;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            plateau.push(p);
            conn.for_each_neighbor(p, w, h, |q| {
                let u = data[q];
                if u < v {
                    is_min = false;
                } else if u == v && !visited[q] {
                    visited[q] = true;
                    queue.push_back(q);
                }
            });
        }
        if is_min {
            count += 1;
            for &p in &plateau {
                labels[p] = count;
            }
        }
    }
    LabelImage::from_raw(w, h, labels, count as usize)
}

#[derive(Debug, PartialEq)]
struct Entry {
    level: f64,
    seq: u64,
    pixel: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    // BinaryHeap is a max-heap: lowest level, then earliest insertion, wins.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .level
            .total_cmp(&self.level)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Meyer flooding from labelled seeds.
///
/// Seed pixels keep their labels. Pixels are dequeued by increasing gradient
/// value with FIFO order among equal values; a dequeued pixel hands its label
/// to every still-unlabelled neighbour and enqueues it. Seeds are scanned in
/// raster order. The result has no watershed-line pixels.
pub fn watershed_from_markers(g: &GradientImage, seeds: &LabelImage, conn: Connectivity) -> Result<LabelImage> {
    g.as_gray().ensure_same_dims(seeds.dims())?;
    if seeds.num_labels() == 0 {
        return Err(Error::EmptySeeds);
    }
    let (w, h) = g.dims();
    let data = g.data();
    let mut labels = seeds.labels().to_vec();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;

    for (p, &l) in seeds.labels().iter().enumerate() {
        if l == 0 {
            continue;
        }
        conn.for_each_neighbor(p, w, h, |q| {
            if labels[q] == 0 {
                labels[q] = l;
                heap.push(Entry {
                    level: data[q],
                    seq,
                    pixel: q,
                });
                seq += 1;
            }
        });
    }

    while let Some(Entry { pixel: p, .. }) = heap.pop() {
        let l = labels[p];
        conn.for_each_neighbor(p, w, h, |q| {
            if labels[q] == 0 {
                labels[q] = l;
                heap.push(Entry {
                    level: data[q],
                    seq,
                    pixel: q,
                });
                seq += 1;
            }
        });
    }

    LabelImage::new(w, h, labels)
}

/// Any image the segmentation pipelines accept.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentInput {
    Color(ColorImage),
    Gray(GrayImage),
    Gradient(GradientImage),
}

impl SegmentInput {
    pub fn dims(&self) -> (usize, usize) {
        match self {
            SegmentInput::Color(c) => c.dims(),
            SegmentInput::Gray(g) => g.dims(),
            SegmentInput::Gradient(g) => g.dims(),
        }
    }

    /// Sobel gradient of the luminance, or the gradient itself.
    pub fn gradient(&self) -> GradientImage {
        match self {
            SegmentInput::Color(c) => sobel_gradient(&to_gray(c)),
            SegmentInput::Gray(g) => sobel_gradient(g),
            SegmentInput::Gradient(g) => g.clone(),
        }
    }
}

impl From<ColorImage> for SegmentInput {
    fn from(c: ColorImage) -> Self {
        SegmentInput::Color(c)
    }
}

impl From<GrayImage> for SegmentInput {
    fn from(g: GrayImage) -> Self {
        SegmentInput::Gray(g)
    }
}

impl From<GradientImage> for SegmentInput {
    fn from(g: GradientImage) -> Self {
        SegmentInput::Gradient(g)
    }
}

/// Intermediate products of an AMR-WT run.
#[derive(Debug, Clone)]
pub struct AmrWtOutput {
    pub gradient: GradientImage,
    pub reconstruction: AmrResult,
    pub seeds: LabelImage,
    pub labels: LabelImage,
}

/// Gradient, adaptive reconstruction, regional minima, flooding.
pub fn amr_wt_detailed(input: &SegmentInput, params: &AmrParams, conn: Connectivity) -> Result<AmrWtOutput> {
    let gradient = input.gradient();
    let reconstruction = amr(&gradient, params)?;
    let seeds = regional_minima(&reconstruction.psi, conn);
    let labels = watershed_from_markers(&reconstruction.psi, &seeds, conn)?;
    Ok(AmrWtOutput {
        gradient,
        reconstruction,
        seeds,
        labels,
    })
}

/// AMR-WT segmentation; returns the complete partition.
pub fn amr_wt(input: &SegmentInput, params: &AmrParams, conn: Connectivity) -> Result<LabelImage> {
    amr_wt_detailed(input, params, conn).map(|o| o.labels)
}

/// Plain watershed on a gradient seeded by its own regional minima.
pub fn watershed(g: &GradientImage, conn: Connectivity) -> Result<LabelImage> {
    let seeds = regional_minima(g, conn);
    watershed_from_markers(g, &seeds, conn)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::synthetic;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grad(w: usize, h: usize, data: Vec<f64>) -> GradientImage {
        GradientImage::new(w, h, data).unwrap()
    }

    #[test]
    fn point_minimum() {
        let mut data = vec![1.0; 9];
        data[4] = 0.0;
        let m = regional_minima(&grad(3, 3, data), Connectivity::Eight);
        assert_eq!(m.num_labels(), 1);
        assert_eq!(m.labels()[4], 1);
        assert_eq!(m.labels().iter().filter(|&&l| l != 0).count(), 1);
    }

    #[test]
    fn constant_image_is_one_minimum() {
        let m = regional_minima(&grad(4, 3, vec![0.5; 12]), Connectivity::Four);
        assert_eq!(m.num_labels(), 1);
        assert!(m.labels().iter().all(|&l| l == 1));
    }

    #[test]
    fn minima_match_plateau_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let g = grad(10, 10, (0..100).map(|_| rng.gen_range(0..4) as f64 / 3.0).collect());
            for (conn, eight) in [(Connectivity::Four, false), (Connectivity::Eight, true)] {
                let fast = regional_minima(&g, conn);
                assert_eq!(fast.labels(), oracle::regional_minima(g.as_gray(), eight).as_slice());
            }
        }
    }

    #[test]
    fn ridge_pixel_goes_to_first_seed() {
        let g = grad(5, 1, vec![0.0, 0.0, 1.0, 0.0, 0.0]);
        let seeds = LabelImage::new(5, 1, vec![1, 0, 0, 0, 2]).unwrap();
        let out = watershed_from_markers(&g, &seeds, Connectivity::Eight).unwrap();
        assert_eq!(out.labels(), &[1, 1, 1, 2, 2]);
    }

    #[test]
    fn single_seed_floods_everything() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let g = grad(6, 6, (0..36).map(|_| rng.gen()).collect());
        let mut seeds = vec![0; 36];
        seeds[14] = 1;
        let out = watershed_from_markers(&g, &LabelImage::new(6, 6, seeds).unwrap(), Connectivity::Four).unwrap();
        assert!(out.labels().iter().all(|&l| l == 1));
    }

    #[test]
    fn empty_seeds_rejected() {
        let g = grad(2, 2, vec![0.0; 4]);
        let seeds = LabelImage::new(2, 2, vec![0; 4]).unwrap();
        assert!(matches!(
            watershed_from_markers(&g, &seeds, Connectivity::Eight),
            Err(Error::EmptySeeds)
        ));
    }

    fn region_is_connected(labels: &LabelImage, label: u32, conn: Connectivity) -> bool {
        let (w, h) = labels.dims();
        let members: Vec<usize> = (0..w * h).filter(|&p| labels.labels()[p] == label).collect();
        let mut seen = vec![false; w * h];
        let mut stack = vec![members[0]];
        seen[members[0]] = true;
        let mut reached = 0;
        while let Some(p) = stack.pop() {
            reached += 1;
            conn.for_each_neighbor(p, w, h, |q| {
                if !seen[q] && labels.labels()[q] == label {
                    seen[q] = true;
                    stack.push(q);
                }
            });
        }
        reached == members.len()
    }

    #[test]
    fn flooding_invariants_on_random_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..30 {
            let g = grad(12, 9, (0..108).map(|_| rng.gen_range(0..8) as f64 / 7.0).collect());
            for conn in [Connectivity::Four, Connectivity::Eight] {
                let seeds = regional_minima(&g, conn);
                let out = watershed_from_markers(&g, &seeds, conn).unwrap();
                assert!(out.is_complete());
                assert_eq!(out.num_labels(), seeds.num_labels());
                for (s, o) in seeds.labels().iter().zip(out.labels()) {
                    if *s != 0 {
                        assert_eq!(s, o);
                    }
                }
                for l in 1..=out.num_labels() as u32 {
                    assert!(region_is_connected(&out, l, conn));
                }
                assert_eq!(watershed_from_markers(&g, &seeds, conn).unwrap(), out);
            }
        }
    }

    #[test]
    fn two_basins_split_along_ridge() {
        let g = synthetic::two_basin(32);
        let seeds = regional_minima(&g, Connectivity::Eight);
        assert_eq!(seeds.num_labels(), 2);
        let out = watershed_from_markers(&g, &seeds, Connectivity::Eight).unwrap();
        assert_eq!(out.num_labels(), 2);
        // the ridge sits between columns 15 and 16
        for y in 0..32 {
            for x in 0..32 {
                let left = out.get(x, y) == out.get(0, 0);
                if x <= 14 {
                    assert!(left, "({x},{y})");
                }
                if x >= 17 {
                    assert!(!left, "({x},{y})");
                }
            }
        }
    }

    #[test]
    fn amr_wt_examples() {
        let params = |s| AmrParams::new(s, 50, 1e-4).unwrap();
        let flat = SegmentInput::Gray(GrayImage::filled(10, 8, 0.3).unwrap());
        assert_eq!(amr_wt(&flat, &params(2), Connectivity::Eight).unwrap().num_labels(), 1);

        let basins = SegmentInput::Gradient(synthetic::two_basin(32));
        let checker = SegmentInput::Gradient(synthetic::checkerboard(48));
        for s in 1..=3 {
            assert_eq!(
                amr_wt(&basins, &params(s), Connectivity::Eight).unwrap().num_labels(),
                2
            );
            assert_eq!(
                amr_wt(&checker, &params(s), Connectivity::Eight).unwrap().num_labels(),
                4
            );
        }
    }
}
