use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0} (expected 2 or 3)")]
    UnsupportedDimension(usize),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("node {node} shifted by {shift:?} leaves the active lattice")]
    OutOfRange { node: usize, shift: [i32; 3] },

    #[error("field has {found} values but the domain requires {expected}")]
    DomainMismatch { expected: usize, found: usize },

    #[error("matrix is not symmetric (entry ({row},{col}) differs from its transpose)")]
    NonSymmetric { row: usize, col: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("profile certification failed: {0}")]
    Certification(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("query point {0:?} lies outside the triangulated region")]
    OutsideRegion(Vec<f64>),

    #[error("config error: {0}")]
    Config(String),

    #[error("field file parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
