//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by graph loading, detection, training and evaluation.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// A file violated one of the documented on-disk formats.
    #[error("malformed file {path}: {detail}")]
    Format { path: PathBuf, detail: String },

    #[error("node id {id} out of range for a graph with {num_nodes} nodes")]
    NodeIdOutOfRange { id: usize, num_nodes: usize },

    #[error("operation requires at least one edge")]
    EmptyEdgeSet,

    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("embedding row {row} has zero norm")]
    ZeroNormEmbedding { row: usize },

    #[error("non-finite value encountered in {what}")]
    NonFinite { what: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),

    #[error("could not draw a training split containing every class after {retries} retries")]
    SplitRetriesExhausted { retries: usize },

    #[error("graph too small: {0}")]
    GraphTooSmall(String),

    #[error("stage {stage} failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wraps an error with the pipeline stage it occurred in.
    pub fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}
