use thiserror::Error;

/// Errors raised by kernel, measure and boundary computations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point {point} lies outside the domain of the {kernel} kernel")]
    Domain { kernel: &'static str, point: String },

    #[error("boundary node {node} lies outside the {boundary} boundary")]
    BoundaryDomain {
        boundary: &'static str,
        node: String,
    },

    #[error("points {first} and {second} are indistinguishable (kernel distance {distance:e})")]
    DuplicatePoints {
        first: usize,
        second: usize,
        distance: f64,
    },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:e} below {threshold:e}")]
    NotPositiveDefinite { min_eigenvalue: f64, threshold: f64 },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("elements live on different sections")]
    SectionMismatch,

    #[error("{what} must lie in {min}..={max}, got {value}")]
    OutOfRange {
        what: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("map is not total: atom {atom} has no image in a codomain of {codomain} atoms")]
    MapNotTotal { atom: usize, codomain: usize },

    #[error("gram matrix is numerically singular: pruning left no points")]
    SectionExhausted,

    #[error("linear solve failed: {0}")]
    Solve(String),
}

pub type Result<T> = std::result::Result<T, Error>;
