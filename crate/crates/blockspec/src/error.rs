use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid block probability vector: {0}")]
    RhoInvalid(String),

    #[error("communication matrix entry out of range: {0}")]
    EntryOutOfRange(String),

    #[error("undirected model requires symmetric communication matrices ({0})")]
    SymmetryViolation(String),

    #[error("blocks {p} and {q} are indistinguishable in every modality")]
    NotIdentifiable { p: usize, q: usize },

    #[error("degenerate latent factors: {0}")]
    DegenerateFactors(String),

    #[error("dimension error: {0}")]
    DimensionError(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("omega must lie in (3/4, 1), got {0}")]
    OmegaOutOfRange(f64),

    #[error("xi must lie in (3/8, 1/2), got {0}")]
    XiOutOfRange(f64),

    #[error("theta must lie in (0, 1], got {0}")]
    ThetaOutOfRange(f64),

    #[error("zeta must be positive, got {0}")]
    ZetaOutOfRange(f64),

    #[error("exact clustering is limited to {max} rows, got {n}")]
    TooLargeForExact { n: usize, max: usize },

    #[error("no K' <= {k_max} brings the clustering residual below {threshold}")]
    NoKFound { k_max: usize, threshold: f64 },

    #[error("label vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("columns are not orthonormal (deviation {deviation:.3e} exceeds {tolerance:.3e})")]
    NotOrthonormal { deviation: f64, tolerance: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
