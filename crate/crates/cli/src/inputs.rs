use std::path::{Path, PathBuf};

use morphoseg::io::{self, LoadedImage};
use morphoseg::{load_gradient, ColorImage, GradientImage, LabelImage, SegmentInput};

use crate::{CliError, GradientSource, THREADS_ENV};

/// Fails with an input error naming the first path that does not exist.
pub fn require_files<'a>(paths: impl IntoIterator<Item = &'a PathBuf>) -> Result<(), CliError> {
    for p in paths {
        if !p.is_file() {
            return Err(CliError::Input(format!("input file not found: {}", p.display())));
        }
    }
    Ok(())
}

pub fn require_dir(path: &Path) -> Result<(), CliError> {
    if !path.is_dir() {
        return Err(CliError::Input(format!("directory not found: {}", path.display())));
    }
    Ok(())
}

pub fn create_out_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)
        .map_err(|e| CliError::Input(format!("cannot create output directory {}: {e}", path.display())))
}

fn is_pfm(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pfm"))
}

pub fn load_input(path: &Path) -> Result<SegmentInput, CliError> {
    if is_pfm(path) {
        return Ok(SegmentInput::Gradient(load_gradient(path)?));
    }
    Ok(match io::load_image(path)? {
        LoadedImage::Gray(g) => SegmentInput::Gray(g),
        LoadedImage::Color(c) => SegmentInput::Color(c),
    })
}

/// Input image with its gradient replaced by `--gradient <path>` if given.
pub fn load_with_gradient(path: &Path, source: &GradientSource) -> Result<(SegmentInput, GradientImage), CliError> {
    let input = load_input(path)?;
    let gradient = match source {
        GradientSource::Sobel => input.gradient(),
        GradientSource::File(g) => {
            let g = load_gradient(g)?;
            if g.dims() != input.dims() {
                return Err(morphoseg::Error::Shape {
                    left_width: input.dims().0,
                    left_height: input.dims().1,
                    right_width: g.width(),
                    right_height: g.height(),
                }
                .into());
            }
            g
        }
    };
    Ok((input, gradient))
}

/// A three-channel view of any input, for overlays and colour features.
pub fn as_color(input: &SegmentInput) -> ColorImage {
    let (w, h) = input.dims();
    let gray = |v: f64| [v; 3];
    let data = match input {
        SegmentInput::Color(c) => return c.clone(),
        SegmentInput::Gray(g) => g.data().iter().map(|&v| gray(v)).collect(),
        SegmentInput::Gradient(g) => g.data().iter().map(|&v| gray(v)).collect(),
    };
    ColorImage::new(w, h, data).expect("samples come from a validated image")
}

/// Region boundaries painted red over the input.
pub fn overlay(input: &SegmentInput, labels: &LabelImage) -> ColorImage {
    let base = as_color(input);
    let (w, h) = base.dims();
    let data = base
        .data()
        .iter()
        .zip(labels.boundary_mask())
        .map(|(&px, edge)| if edge { [1.0, 0.0, 0.0] } else { px })
        .collect();
    ColorImage::new(w, h, data).expect("samples stay in [0, 1]")
}

pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "image".into())
}

/// Image stem of a label file written by `segment` or `spectral`.
pub fn source_stem(path: &Path) -> String {
    let s = stem(path);
    for suffix in ["_labels", "_spectral"] {
        if let Some(base) = s.strip_suffix(suffix) {
            return base.to_string();
        }
    }
    s
}

/// Ground-truth files for `stem`, sorted by name.
pub fn find_ground_truths(gt_dir: &Path, stem: &str) -> Result<Vec<PathBuf>, CliError> {
    let list = |dir: &Path, keep: &dyn Fn(&str) -> bool| -> Result<Vec<PathBuf>, CliError> {
        let entries =
            std::fs::read_dir(dir).map_err(|e| CliError::Input(format!("cannot list {}: {e}", dir.display())))?;
        let mut found: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.is_file()
                    && p.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"))
                    && p.file_name().is_some_and(|n| keep(&n.to_string_lossy()))
            })
            .collect();
        found.sort();
        Ok(found)
    };
    let nested = gt_dir.join(stem);
    let found = if nested.is_dir() {
        list(&nested, &|_| true)?
    } else {
        let prefix = format!("{stem}_gt");
        list(gt_dir, &|name| name.starts_with(&prefix))?
    };
    if found.is_empty() {
        return Err(CliError::Input(format!(
            "no ground truth for '{stem}' in {} (expected {stem}/*.png or {stem}_gt*.png)",
            gt_dir.display()
        )));
    }
    Ok(found)
}

pub fn load_labels(path: &Path) -> Result<LabelImage, CliError> {
    Ok(io::load_labels(path)?)
}

/// Worker pool sized by `MORPHOSEG_THREADS` when set.
pub fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Input(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Internal(format!("cannot start worker pool: {e}")))
}
