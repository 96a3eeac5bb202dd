use thiserror::Error;

/// Errors produced by the numeric kernels and samplers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("polygamma order {order} exceeds the supported maximum {max}")]
    PolygammaOrder { order: u32, max: u32 },

    #[error("moment order {order} exceeds the partition-sum maximum {max}")]
    MomentOrder { order: u32, max: u32 },

    /// A Gram pivot fell below the rank-deficiency threshold: the simplex is
    /// numerically flat and its log-volume is -inf.
    #[error("degenerate simplex: Gram pivot {pivot:.3e} is below the deficiency threshold")]
    DegenerateSimplex { pivot: f64 },

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("rejection sampler acceptance rate {rate:.3e} fell below 1e-6; the law is mis-specified")]
    RejectionFailure { rate: f64 },

    #[error("law fails the admissibility diagnostics: {0}")]
    NotAdmissible(String),

    /// Characteristic-function comparisons are only stable for |t| <= 1/(4 eps).
    #[error("t = {t} lies outside the stable evaluation window |t| <= {window}")]
    OutsideCharWindow { t: f64, window: f64 },

    #[error("empty sample batch")]
    EmptyBatch,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
