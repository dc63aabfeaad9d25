use thiserror::Error;

/// Errors produced by the shape matching library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed PGM header: {0}")]
    MalformedHeader(String),
    #[error("truncated PGM data: expected {expected} pixels, found {found}")]
    TruncatedData { expected: usize, found: usize },
    #[error("shape has no points")]
    EmptyShape,
    #[error("degenerate shape: {0}")]
    DegenerateShape(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("descriptor sets were built with different parameters")]
    ParamMismatch,
    #[error("invalid parameters: {0}")]
    BadParams(String),
    #[error("cost matrix is empty")]
    EmptyMatrix,
    #[error("input array is empty")]
    EmptyInput,
    #[error("input contains a non-finite or negative value at index {0}")]
    NonFiniteInput(usize),
    #[error("linear system is singular: {0}")]
    SingularSystem(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("gallery is empty")]
    EmptyGallery,
}

pub type Result<R, E = Error> = std::result::Result<R, E>;
