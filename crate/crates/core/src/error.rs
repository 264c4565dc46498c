use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("torus parameter mismatch: {left} vs {right}")]
    ParamsMismatch { left: String, right: String },

    #[error("representation theta {rep} does not match element theta {element} modulo 1")]
    ThetaMismatch { rep: f64, element: f64 },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("map is not in the image of can at this truncation (round-trip residual {residual:e})")]
    NotInvertible { residual: f64 },

    #[error("eigenvalue at angle {angle} lies within {delta} of the branch cut at {cut}")]
    NearBranchCut { angle: f64, cut: f64, delta: f64 },

    #[error("loop is aliased: angular step {max_step} is not below pi")]
    Aliasing { max_step: f64 },

    #[error("matrix is not unitary (residual {residual:e})")]
    NotUnitary { residual: f64 },

    #[error("word basis exceeds the dimension cap of {cap}")]
    BasisOverflow { cap: usize },

    #[error("{label} residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { label: String, residual: f64, tol: f64 },

    #[error("numerical routine failed: {0}")]
    Numerical(String),

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
