use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at index {index})")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("least-squares system is rank deficient")]
    RankDeficient,

    #[error("degenerate cluster: {0}")]
    DegenerateCluster(String),

    #[error("residual variance {0:e} is below the floor")]
    ZeroResidual(f64),

    #[error("every cluster degenerated or was deleted")]
    AllClustersDegenerate,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parameter-count convention {0} does not apply to this model")]
    InvalidConvention(String),

    #[error("point lies at normal distance {p} beyond the curvature radius {r}")]
    BeyondCurvatureCenter { p: f64, r: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parse error at row {row}, column {col}: {msg}")]
    Parse { row: usize, col: usize, msg: String },

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("model schema version {found} is not supported (expected {expected})")]
    SchemaVersionMismatch { found: u64, expected: u64 },

    #[error("malformed model file: {0}")]
    Schema(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
