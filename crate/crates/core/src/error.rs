use thiserror::Error;

/// Errors raised by the amplifier model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A thermal bath was requested. Only the zero-temperature model is implemented.
    #[error(
        "bath occupancy {0} requested: finite-temperature baths are not supported, \
         the bath occupancy must be 0"
    )]
    ThermalBath(f64),

    /// The linearised response is singular (a fixed point exactly at a turning point,
    /// probed at the matching frequency).
    #[error("critical point: {0}")]
    CriticalPoint(String),

    /// The four-term spectrum came out with a non-negligible imaginary part.
    #[error("spectrum is not real: re = {re:e}, im = {im:e}")]
    NonRealSpectrum { re: f64, im: f64 },

    /// An operation that needs a stable fixed point was given an unstable one.
    #[error("fixed point at n0 = {n0} is unstable (max Re lambda = {max_re_lambda:e})")]
    UnstableFixedPoint { n0: f64, max_re_lambda: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// A sweep produced no physical rows.
    #[error("empty dataset: {0}")]
    EmptyDataset(String),

    /// The eigenvalue solver did not converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {value}")))
    }
}
