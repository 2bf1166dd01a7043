use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    /// The gradient of the inner objective vanished: the iterate is already
    /// an inner-level minimizer, so no cut can be formed.
    #[error("gradient is zero; the iterate already minimizes the inner objective")]
    ZeroGradient,

    #[error("matrix is zero")]
    ZeroMatrix,

    #[error("Bregman distance evaluated to {value}, below the roundoff band")]
    NegativeDistance { value: f64 },

    #[error("primal and dual iterates are not mirror-consistent (relative gap {gap:e})")]
    MirrorInconsistent { gap: f64 },

    #[error("sample set is empty")]
    EmptySamples,

    #[error("no feasible candidate found on the oracle grid")]
    NoFeasibleCandidate,

    #[error("trace column {0} is missing or nonpositive inside the fit window")]
    InvalidTraceWindow(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
