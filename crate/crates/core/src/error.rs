use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: data has d={data}, centers have d={centers}")]
    DimensionMismatch { data: usize, centers: usize },

    #[error("point set must contain at least one point")]
    Empty,

    #[error("coordinate buffer of length {len} is not a multiple of d={d}")]
    RaggedCoordinates { len: usize, d: usize },

    #[error("coordinate {index} is not finite")]
    NonFinite { index: usize },

    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("k={k} exceeds the number of points n={n}")]
    TooManyCenters { k: usize, n: usize },

    #[error("operation needs at least {needed} centers, got {k}")]
    TooFewCenters { k: usize, needed: usize },

    #[error("every point coincides with a center; D² distribution is degenerate")]
    DegenerateDistribution,

    #[error("voronoi set of center {0} is empty")]
    EmptyVoronoiSet(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },
}
