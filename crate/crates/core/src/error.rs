use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, LayoutError>;

#[derive(Debug, Error)]
pub enum LayoutError {
    #[error("i/o error on {}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed Matrix Market header: {reason}")]
    MalformedHeader { line: usize, reason: String },

    #[error("line {line}: malformed entry: {reason}")]
    MalformedEntry { line: usize, reason: String },

    #[error("line {line}: index ({row}, {col}) outside declared bounds {rows}x{cols}")]
    IndexOutOfBounds {
        line: usize,
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("vertex {vertex} out of range for graph with {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("layout has {layout} coordinates but graph has {graph} vertices")]
    LengthMismatch { graph: usize, layout: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("metric undefined: {0}")]
    DegenerateMetric(String),

    #[error("line {line}: malformed layout entry: {reason}")]
    MalformedLayout { line: usize, reason: String },

    #[error("failed to build worker pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl LayoutError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LayoutError::Io {
            path: path.into(),
            source,
        }
    }
}
