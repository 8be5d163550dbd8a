use thiserror::Error;

use crate::field::ComplexField;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value at lattice index {index}")]
    NonFinite { index: usize },

    #[error("field has {got} values but the grid has {expected} nodes")]
    LengthMismatch { expected: usize, got: usize },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("{op} requires D = {required}, got D = {found}")]
    Dimension {
        op: &'static str,
        required: usize,
        found: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),

    #[error("time step {dt} exceeds the explicit stability limit {limit}")]
    Stability { dt: f64, limit: f64 },

    /// The solver left the regime where its norms are trustworthy.
    /// Carries the last frame that passed the health check.
    #[error(
        "blow-up detected at t = {t}: {reason} (last healthy frame at t = {last_healthy_time})"
    )]
    BlowUp {
        t: f64,
        reason: String,
        last_healthy_time: f64,
        last_healthy: Box<ComplexField>,
    },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}
