//! Brute-force reference implementations used as test oracles.
//!
//! Everything here is deliberately naive and shares no code with the
//! production paths it checks.

use std::collections::HashMap;

use crate::image::{GrayImage, LabelImage};

fn neighborhood_extremum(img: &GrayImage, radius: usize, max: bool) -> Vec<f64> {
    let (w, h) = img.dims();
    let r = radius as isize;
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as isize {
        for x in 0..w as isize {
            let mut best = if max { f64::NEG_INFINITY } else { f64::INFINITY };
            for dy in -r..=r {
                for dx in -r..=r {
                    if dx * dx + dy * dy > r * r {
                        continue;
                    }
                    let (qx, qy) = (x + dx, y + dy);
                    if qx < 0 || qy < 0 || qx >= w as isize || qy >= h as isize {
                        continue;
                    }
                    let v = img.get(qx as usize, qy as usize);
                    best = if max { best.max(v) } else { best.min(v) };
                }
            }
            out.push(best);
        }
    }
    out
}

pub fn dilate(img: &GrayImage, radius: usize) -> Vec<f64> {
    neighborhood_extremum(img, radius, true)
}

pub fn erode(img: &GrayImage, radius: usize) -> Vec<f64> {
    neighborhood_extremum(img, radius, false)
}

fn to_image(like: &GrayImage, data: Vec<f64>) -> GrayImage {
    GrayImage::from_raw(like.width(), like.height(), data)
}

/// Iterates `δ(f) ∧ g` (unit disk) until nothing changes.
pub fn reconstruct_dilation(marker: &GrayImage, mask: &GrayImage) -> Vec<f64> {
    let mut cur = marker.data().to_vec();
    loop {
        let d = dilate(&to_image(mask, cur.clone()), 1);
        let next: Vec<f64> = d.iter().zip(mask.data()).map(|(a, b)| a.min(*b)).collect();
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// Iterates `ε(f) ∨ g` (unit disk) until nothing changes.
pub fn reconstruct_erosion(marker: &GrayImage, mask: &GrayImage) -> Vec<f64> {
    let mut cur = marker.data().to_vec();
    loop {
        let e = erode(&to_image(mask, cur.clone()), 1);
        let next: Vec<f64> = e.iter().zip(mask.data()).map(|(a, b)| a.max(*b)).collect();
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

/// `R^φ` at radius `radius` built from the naive pieces above.
pub fn closing(g: &GrayImage, radius: usize) -> Vec<f64> {
    let marker = to_image(g, erode(g, radius));
    let opened = to_image(g, reconstruct_dilation(&marker, g));
    let marker = to_image(g, dilate(&opened, radius));
    reconstruct_erosion(&marker, &opened)
}

/// `R^γ` at radius `radius` built from the naive pieces above.
pub fn opening(g: &GrayImage, radius: usize) -> Vec<f64> {
    let marker = to_image(g, dilate(g, radius));
    let closed = to_image(g, reconstruct_erosion(&marker, g));
    let marker = to_image(g, erode(&closed, radius));
    reconstruct_dilation(&marker, &closed)
}

/// Direct evaluation of the pointwise maximum of closings over `s..=m`.
pub fn amr_fold(g: &GrayImage, s: usize, m: usize) -> Vec<f64> {
    let mut acc = vec![f64::NEG_INFINITY; g.len()];
    for i in s..=m {
        for (a, v) in acc.iter_mut().zip(closing(g, i)) {
            *a = a.max(v);
        }
    }
    acc
}

fn neighbors(x: usize, y: usize, w: usize, h: usize, eight: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for dy in -1isize..=1 {
        for dx in -1isize..=1 {
            if (dx, dy) == (0, 0) || (!eight && dx != 0 && dy != 0) {
                continue;
            }
            let (qx, qy) = (x as isize + dx, y as isize + dy);
            if qx >= 0 && qy >= 0 && (qx as usize) < w && (qy as usize) < h {
                out.push((qx as usize, qy as usize));
            }
        }
    }
    out
}

/// Flood each equal-valued plateau and keep those with no lower neighbour.
pub fn regional_minima(g: &GrayImage, eight: bool) -> Vec<u32> {
    let (w, h) = g.dims();
    let mut comp = vec![usize::MAX; w * h];
    let mut members: Vec<Vec<(usize, usize)>> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if comp[y * w + x] != usize::MAX {
                continue;
            }
            let id = members.len();
            let v = g.get(x, y);
            let mut stack = vec![(x, y)];
            comp[y * w + x] = id;
            let mut list = Vec::new();
            while let Some((px, py)) = stack.pop() {
                list.push((px, py));
                for (qx, qy) in neighbors(px, py, w, h, eight) {
                    if comp[qy * w + qx] == usize::MAX && g.get(qx, qy) == v {
                        comp[qy * w + qx] = id;
                        stack.push((qx, qy));
                    }
                }
            }
            members.push(list);
        }
    }
    let is_min: Vec<bool> = members
        .iter()
        .map(|list| {
            let v = g.get(list[0].0, list[0].1);
            list.iter().all(|&(px, py)| {
                neighbors(px, py, w, h, eight)
                    .into_iter()
                    .all(|(qx, qy)| g.get(qx, qy) >= v)
            })
        })
        .collect();
    // components were discovered in raster order of their first pixel
    let mut label_of = vec![0u32; members.len()];
    let mut next = 0;
    for (id, &m) in is_min.iter().enumerate() {
        if m {
            next += 1;
            label_of[id] = next;
        }
    }
    comp.iter().map(|&c| label_of[c]).collect()
}

/// Rand index by enumerating every unordered pixel pair.
pub fn rand_index(a: &LabelImage, b: &LabelImage) -> f64 {
    let (la, lb) = (a.labels(), b.labels());
    let n = la.len();
    if n < 2 {
        return 1.0;
    }
    let mut agree = 0u64;
    let mut total = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            total += 1;
            if (la[i] == la[j]) == (lb[i] == lb[j]) {
                agree += 1;
            }
        }
    }
    agree as f64 / total as f64
}

fn regions(l: &LabelImage) -> HashMap<u32, Vec<usize>> {
    let mut map: HashMap<u32, Vec<usize>> = HashMap::new();
    for (i, &v) in l.labels().iter().enumerate() {
        map.entry(v).or_default().push(i);
    }
    map
}

/// Covering of `gt` by `seg` via explicit set intersections.
pub fn covering(seg: &LabelImage, gt: &LabelImage) -> f64 {
    let n = gt.labels().len() as f64;
    let seg_regions = regions(seg);
    let mut total = 0.0;
    for r in regions(gt).values() {
        let best = seg_regions
            .values()
            .map(|s| {
                let inter = r.iter().filter(|i| s.contains(i)).count() as f64;
                let union = (r.len() + s.len()) as f64 - inter;
                inter / union
            })
            .fold(0.0, f64::max);
        total += r.len() as f64 / n * best;
    }
    total
}

/// Variation of information in bits from marginal and joint entropies.
pub fn variation_of_information(a: &LabelImage, b: &LabelImage) -> f64 {
    let n = a.labels().len() as f64;
    let entropy = |counts: Vec<usize>| -> f64 {
        counts
            .into_iter()
            .filter(|&c| c > 0)
            .map(|c| {
                let p = c as f64 / n;
                -p * p.log2()
            })
            .sum()
    };
    let mut joint: HashMap<(u32, u32), usize> = HashMap::new();
    for (&x, &y) in a.labels().iter().zip(b.labels()) {
        *joint.entry((x, y)).or_default() += 1;
    }
    let ha = entropy(regions(a).values().map(Vec::len).collect());
    let hb = entropy(regions(b).values().map(Vec::len).collect());
    let hab = entropy(joint.into_values().collect());
    // VI = 2 H(A,B) - H(A) - H(B)
    2.0 * hab - ha - hb
}
