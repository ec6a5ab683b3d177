//! Crate-wide error type.

use thiserror::Error;

use crate::contextual::ContextClass;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid barrier: {0}")]
    InvalidBarrier(String),

    #[error("wavenumber must be positive (got {0})")]
    NonPositiveWavenumber(f64),

    #[error(
        "unitarity residual {residual:.3e} exceeds tolerance {tolerance:.3e} at {slices} slices"
    )]
    UnitarityNotMet {
        residual: f64,
        tolerance: f64,
        slices: usize,
    },

    #[error("interior propagation overflowed in the deep-tunneling regime")]
    PropagationOverflow,

    #[error("|{name}| = {magnitude:.3e} is too small for a stable first-order extraction")]
    AmplitudeTooSmall { name: &'static str, magnitude: f64 },

    #[error("singular measurement context: {0}")]
    SingularContext(ContextClass),

    #[error("degenerate spin post-selection: {0}")]
    DegeneratePostSelection(String),

    #[error("interior grid too coarse ({0} points)")]
    GridTooCoarse(usize),

    #[error("wave packet has non-negligible weight at k <= 0 (k_center/k_sigma = {0:.2})")]
    PacketBelowZero(f64),

    #[error("vanishing post-selection probability ({0:.3e})")]
    VanishingPostSelection(f64),

    #[error("negative variance {0:.3e} beyond tolerance")]
    NegativeVariance(f64),

    #[error("{0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),
}
