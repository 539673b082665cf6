use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// The operation is only defined on non-zero x-frequencies.
    #[error("operation requires k != 0 (got k = 0, eta = {eta}, l = {l})")]
    ZeroFrequency { eta: f64, l: i64 },

    /// The (eta, l) = (0, 0) zero mode carries no lift-up dynamics.
    #[error("zero-frequency evolution is undefined at (eta, l) = (0, 0)")]
    ZeroZeroMode,

    #[error("adaptive quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    /// A derivative of the multiplier was requested at a point where it is
    /// not differentiable.
    #[error("t = {t} is within {h} of a multiplier switching time")]
    SwitchingTime { t: f64, h: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical blow-up at t = {t}: {reason}")]
    BlowUp { t: f64, reason: String },

    #[error("need at least {need} runs, got {got}")]
    InsufficientRuns { got: usize, need: usize },

    #[error("snapshot format: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
