use thiserror::Error;

/// Errors produced by the geometry, overlap, matching and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("grid too large: {samples} sample points exceeds budget of {budget}")]
    GridTooLarge { samples: u64, budget: u64 },

    #[error("degenerate union: hard union area {0} is not positive")]
    DegenerateUnion(f64),

    #[error("degenerate quadrilateral")]
    DegenerateQuadrilateral,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
