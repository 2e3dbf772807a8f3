use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the descriptor pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("face index out of range at line {line}: index {index} >= vertex count {vertex_count}")]
    FaceIndexOutOfRange {
        line: usize,
        index: usize,
        vertex_count: usize,
    },

    #[error("unsupported mesh format: {0}")]
    UnsupportedFormat(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("non-triangular face {face} with {arity} vertices")]
    NonTriangularFace { face: usize, arity: usize },

    #[error("invalid kernel scale t = {0}; must be positive and finite")]
    InvalidKernelScale(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("empty graph: every vertex is isolated")]
    EmptyGraph,

    #[error("degree/mass matrix has nonpositive diagonal entry {value} at row {row}")]
    NonPositiveDiagonal { row: usize, value: f64 },

    #[error("requested {requested} eigenvalues but the problem has dimension {dim}")]
    TooManyEigenvalues { requested: usize, dim: usize },

    #[error("eigensolver did not converge after {iterations} iterations; worst residual {worst_residual:e}")]
    NoConvergence {
        iterations: usize,
        worst_residual: f64,
        /// Best available eigenvalue estimates, ascending.
        best_values: Vec<f64>,
    },

    #[error("dense reference solver limited to dimension {limit}, got {dim}")]
    DenseDimensionGuard { dim: usize, limit: usize },

    #[error("descriptor needs {needed} vertices after isolated-point removal, graph has {available}")]
    MeshTooSmall { needed: usize, available: usize },

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("malformed descriptor record at line {line}: {message}")]
    MalformedDescriptor { line: usize, message: String },

    #[error("incompatible descriptors: {0}")]
    IncompatibleDescriptors(String),

    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),

    #[error("downsampling stalled at {achieved} vertices (target {target})")]
    DownsampleStalled { achieved: usize, target: usize },

    #[error("evaluation error: {0}")]
    Evaluation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
