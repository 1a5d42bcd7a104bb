use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point ({re}, {im}) lies outside the open unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("1-D quadrature did not converge (value {value:e}, error estimate {error:e})")]
    QuadratureFailure { value: f64, error: f64 },

    #[error("density is not finite at node ({re}, {im})")]
    NonFiniteDensity { re: f64, im: f64 },

    #[error("integral diverges (last partial value {last_partial:e})")]
    Divergent { last_partial: f64 },

    #[error("self-map violation: |phi(z)| >= 1 at z = ({re}, {im})")]
    SelfMapViolation { re: f64, im: f64 },

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("operation requires a Taylor polynomial")]
    NotTaylor,

    #[error("zero norm")]
    ZeroNorm,

    #[error("kernel tail terms grow; radius too close to 1 for the moment decay of this weight")]
    KernelTailDivergent,

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("weight table row {row}: {reason}")]
    WeightTable { row: usize, reason: String },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
