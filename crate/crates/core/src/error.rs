use thiserror::Error;

use crate::ode::IntegrationError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invariant undefined at x = 0")]
    InvariantUndefined,
    #[error("insufficient data: need at least 3 points, got {0}")]
    InsufficientData(usize),
    #[error("no crossing: threshold {k} is not below the uncontrolled peak {peak}")]
    NoCrossing { k: f64, peak: f64 },
    #[error("starts above threshold: k = {k} < initial infection {epsilon}")]
    StartsAboveThreshold { k: f64, epsilon: f64 },
    #[error("boundary regime: k = {k} coincides with {which} = {value}")]
    BoundaryRegime { k: f64, which: &'static str, value: f64 },
    #[error("no sliding interval outside regime B")]
    NoSlidingInterval,
    #[error("no outbreak: (1 - epsilon)/rho = {0} <= 1")]
    NoOutbreak(f64),
    #[error("mode chatter: more than {0} mode switches")]
    ModeChatter(usize),
    #[error("spectral iteration failed after {0} iterations")]
    SpectralFailure(usize),
    #[error("invariants valid only for the rank-one, beta = gamma = 1 case with two nodes")]
    InvariantSetupMismatch,
    #[error(transparent)]
    Integration(#[from] IntegrationError),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
