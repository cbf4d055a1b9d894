//! Adaptive morphological reconstruction (AMR) for gradient images, seeded
//! watershed segmentation on top of it (AMR-WT), scale hierarchies,
//! spectral grouping of watershed regions (AMR-SC) and region-based
//! segmentation metrics.
//!
//! ```
//! use morphoseg::{amr_wt, synthetic, AmrParams, Connectivity, SegmentInput};
//!
//! let g = synthetic::two_basin(32);
//! let labels = amr_wt(&SegmentInput::Gradient(g), &AmrParams::default(), Connectivity::Eight).unwrap();
//! assert_eq!(labels.num_labels(), 2);
//! ```

pub mod amr;
pub mod color;
pub mod error;
pub mod gradient;
pub mod hierarchy;
pub mod image;
pub mod io;
pub mod metrics;
pub mod morphology;
pub mod spectral;
pub mod synthetic;
pub mod watershed;

#[cfg(any(test, feature = "oracle"))]
pub mod oracle;

pub use amr::{amr, amr_sequence, convergence_gap, AmrParams, AmrResult};
pub use error::{Error, Result};
pub use gradient::{load_gradient, sobel_gradient, GradientImage};
pub use hierarchy::{build_hierarchy, is_refinement, Hierarchy, HierarchyLevel};
pub use image::{ColorImage, GrayImage, LabelImage};
pub use metrics::{evaluate, MetricReport};
pub use morphology::{closing_by_reconstruction, opening_by_reconstruction, StructuringElement};
pub use spectral::{amr_sc, amr_sc_detailed, group_regions, AmrScOutput, SpectralParams};
pub use watershed::{
    amr_wt, amr_wt_detailed, regional_minima, watershed, watershed_from_markers, AmrWtOutput, Connectivity,
    SegmentInput,
};
