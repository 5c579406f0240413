//! Error type shared by all solver modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite input: {0}")]
    NonFiniteInput(String),

    #[error("non-finite cost at node {node}, step {step}")]
    NonFiniteCost { node: usize, step: usize },

    #[error("mollifier under-resolved: epsilon = {epsilon} < 2*rho = {min}")]
    MollifierUnderResolved { epsilon: f64, min: f64 },

    #[error("initial density not supported in domain (mass before renormalization = {mass:.3e})")]
    UnsupportedInitialDensity { mass: f64 },

    #[error("mass drift {drift:.3e} exceeds 1e-9 in push-forward step")]
    MassDrift { drift: f64 },

    #[error("transition kernel row {row} at step {step} is not stochastic (sum = {sum:.17e})")]
    NonStochasticRow { step: usize, row: usize, sum: f64 },

    #[error("measure weights do not sum to 1 (sum = {sum:.12e})")]
    Unnormalized { sum: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("time {t} outside horizon [0, {t_final}]")]
    TimeOutOfRange { t: f64, t_final: f64 },

    #[error("unknown test id {0} (expected 1, 2 or 3)")]
    UnknownTestId(u8),
}
