use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value {value} at node {node}")]
    NonFinite { node: usize, value: f64 },
    #[error("grid mismatch: {0} vs {1}")]
    GridMismatch(usize, usize),
    #[error("degree error: {0}")]
    Degree(String),
    #[error("metric is not positive definite at node {0}")]
    NotPositiveDefinite(usize),
    #[error("structure not tamed by the symplectic form at node {node} (margin {margin:e})")]
    NotTamed { node: usize, margin: f64 },
    #[error("invalid structure: {0}")]
    InvalidStructure(String),
    #[error("anti-invariant frame degenerates at node {0}")]
    FrameDegenerate(usize),
    #[error("operator is not symmetric: |<Av,w>-<v,Aw>| = {0:e}")]
    NotSymmetric(f64),
    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
    #[error("harmonic space has dimension {found}, expected {expected}")]
    HarmonicDimension { found: usize, expected: usize },
    #[error("form is not closed: max |d alpha| = {0:e}")]
    NotClosed(f64),
    #[error("config error: {0}")]
    Config(String),
    #[error("serialization: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
