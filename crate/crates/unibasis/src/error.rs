//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degree must be odd, got {0}")]
    EvenDegree(u32),

    #[error("degree must be at least {min} for this construction, got {n}")]
    DegreeTooSmall { n: u32, min: u32 },

    #[error("index ({j1}, {j2}) is not in region {region}")]
    NotInRegion { j1: u32, j2: u32, region: &'static str },

    #[error("dimension or degree mismatch: {0}")]
    Mismatch(String),

    #[error("cannot absorb the psi block: N+1 = {n_plus_1} exceeds the Haar block size 2^m = {block}")]
    AbsorptionBlock { n_plus_1: u32, block: usize },

    #[error("scaling fit needs at least {min} distinct sizes, got {got}")]
    DegenerateFit { got: usize, min: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("basis file is malformed: {0}")]
    MalformedFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
