use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape must have 2 or 3 positive extents, got {0:?}")]
    InvalidShape(Vec<usize>),
    #[error("shape {shape:?} holds {expected} values but data has {actual}")]
    LengthMismatch {
        shape: Vec<usize>,
        expected: usize,
        actual: usize,
    },
    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch { left: Vec<usize>, right: Vec<usize> },
    #[error("binary grid holds value {value} at flat index {index}")]
    NotBinary { index: usize, value: u8 },
    #[error("probability grid holds value {value} at flat index {index}")]
    NotProbability { index: usize, value: f32 },
    #[error("adjacency is {adjacency}D but grid is {grid}D")]
    DimensionMismatch { adjacency: usize, grid: usize },

    #[error("{path}: bad magic {found:?}, expected \"BTF1\"")]
    BadMagic { path: PathBuf, found: [u8; 4] },
    #[error("{path}: unknown dtype code {code}")]
    UnknownDtype { path: PathBuf, code: u8 },
    #[error("{path}: ndim {ndim} is not 2 or 3")]
    BadNdim { path: PathBuf, ndim: u8 },
    #[error("{path}: truncated file, needed {needed} bytes but found {found}")]
    Truncated { path: PathBuf, needed: usize, found: usize },
    #[error("{path}: {extra} unexpected bytes after payload")]
    TrailingBytes { path: PathBuf, extra: usize },
    #[error("{path}: {message}")]
    MalformedPgm { path: PathBuf, message: String },
    #[error("{path}: PGM maxval must be in 1..=65535, got {maxval}")]
    PgmMaxval { path: PathBuf, maxval: u32 },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("inconsistent betti numbers: dual count b1={dual} but euler-derived b1={euler}")]
    InconsistentBetti { dual: i64, euler: i64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("finite-difference step {h} leaves probability range at flat index {index} (value {value})")]
    StepOutOfRange { h: f64, index: usize, value: f32 },
    #[error("finite differences are limited to {max} pixels, grid has {actual}")]
    GridTooLarge { max: usize, actual: usize },
    #[error("tile shape {tile:?} does not match a {ndim}D grid")]
    TileRank { tile: Vec<usize>, ndim: usize },
    #[error("slice tiling needs a 3D grid")]
    SliceNeeds3d,
    #[error("invalid fixture parameters: {0}")]
    InvalidFixture(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
