//! Nested partitions indexed by the AMR scale cap.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::amr::amr_sequence;
use crate::error::{Error, Result};
use crate::gradient::GradientImage;
use crate::image::LabelImage;
use crate::watershed::{watershed, Connectivity, SegmentInput};

#[derive(Debug, Clone, PartialEq)]
pub struct HierarchyLevel {
    pub labels: LabelImage,
    /// Cap `m` used for this level; `None` for the raw-gradient level.
    pub scale_cap: Option<usize>,
    pub region_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    pub levels: Vec<HierarchyLevel>,
}

impl Hierarchy {
    pub fn region_counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.region_count).collect()
    }

    /// `is_refinement(level z, level z + 1)` for each adjacent pair.
    pub fn refinement_checks(&self) -> Result<Vec<(bool, usize)>> {
        self.levels
            .windows(2)
            .map(|pair| is_refinement(&pair[0].labels, &pair[1].labels))
            .collect()
    }

    /// Fraction of adjacent level pairs that nest exactly.
    pub fn nesting_rate(&self) -> Result<f64> {
        let checks = self.refinement_checks()?;
        if checks.is_empty() {
            return Ok(1.0);
        }
        Ok(checks.iter().filter(|(ok, _)| *ok).count() as f64 / checks.len() as f64)
    }
}

/// Level 0 is the watershed of the raw gradient; level `z >= 1` is the
/// watershed of `ψ(g, s, s + z - 1)` with early stopping disabled.
pub fn build_hierarchy(input: &SegmentInput, s: usize, m_max: usize, conn: Connectivity) -> Result<Hierarchy> {
    let g = input.gradient();
    let psis = amr_sequence(&g, s, m_max)?;
    let mut sources: Vec<(Option<usize>, &GradientImage)> = vec![(None, &g)];
    sources.extend(psis.iter().enumerate().map(|(k, psi)| (Some(s + k), psi)));
    let levels = sources
        .into_par_iter()
        .map(|(scale_cap, grad)| {
            let labels = watershed(grad, conn)?;
            Ok(HierarchyLevel {
                region_count: labels.num_labels(),
                labels,
                scale_cap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Hierarchy { levels })
}

/// Whether every region of `fine` lies inside a single region of `coarse`.
/// Returns the verdict and the number of fine regions that straddle two or
/// more coarse regions.
pub fn is_refinement(fine: &LabelImage, coarse: &LabelImage) -> Result<(bool, usize)> {
    if fine.dims() != coarse.dims() {
        return Err(Error::shape(fine.dims(), coarse.dims()));
    }
    fine.ensure_complete()?;
    coarse.ensure_complete()?;
    let mut owner: HashMap<u32, u32> = HashMap::new();
    let mut straddling: HashMap<u32, bool> = HashMap::new();
    for (&f, &c) in fine.labels().iter().zip(coarse.labels()) {
        match owner.get(&f) {
            None => {
                owner.insert(f, c);
            }
            Some(&o) if o != c => {
                straddling.insert(f, true);
            }
            _ => {}
        }
    }
    let violations = straddling.len();
    Ok((violations == 0, violations))
}
