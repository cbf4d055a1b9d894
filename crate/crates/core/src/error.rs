use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Unsupported or malformed file contents.
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("shape mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    Shape {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("precondition violated at pixel ({x}, {y}): {message}")]
    Precondition { x: usize, y: usize, message: String },

    #[error("invalid image data: {0}")]
    InvalidData(String),

    #[error("empty seed image")]
    EmptySeeds,

    #[error("label image is not a complete partition ({unassigned} unassigned pixels)")]
    IncompletePartition { unassigned: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn shape(left: (usize, usize), right: (usize, usize)) -> Self {
        Error::Shape {
            left_width: left.0,
            left_height: left.1,
            right_width: right.0,
            right_height: right.1,
        }
    }
}
