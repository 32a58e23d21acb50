//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by the numerical kernels and solvers.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Fractional order outside (0, 1].
    #[error("fractional order must satisfy 0 < beta <= 1, got {0}")]
    InvalidOrder(f64),

    /// An operation that requires beta < 1 was called with the degenerate
    /// point-mass order beta = 1.
    #[error("operation undefined at the degenerate order beta = 1: {0}")]
    DegenerateOrder(&'static str),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Gamma function evaluated at a non-positive integer.
    #[error("gamma pole at x = {0}")]
    GammaPole(f64),

    /// A series or quadrature failed to reach the requested accuracy.
    #[error("no convergence in {what}: estimated error {est:.3e} exceeds tolerance {tol:.3e}")]
    NoConvergence {
        what: &'static str,
        est: f64,
        tol: f64,
    },

    /// Alternating-series cancellation destroyed the requested accuracy.
    #[error("cancellation loss in {what}: estimated relative error {est:.3e}")]
    CancellationLoss { what: &'static str, est: f64 },

    /// Partial sums left the representable range.
    #[error("overflow in {0}")]
    Overflow(&'static str),

    /// Adaptive integration could not continue past `t`.
    #[error("integration failure: step size underflow at t = {t}")]
    IntegrationFailure { t: f64 },

    /// Dense-output query outside the integrated span.
    #[error("query t = {t} outside solution span [{lo}, {hi}]")]
    OutOfSpan { t: f64, lo: f64, hi: f64 },

    /// Two sequences that must have equal length did not.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// A problem definition violated an invariant.
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    /// Parameter choice hits a resonance excluded by the closed form.
    #[error("resonant parameter: {0}")]
    ResonantParameter(String),

    /// Trajectory shorter than the lag window requires.
    #[error("trajectory of length {len} too short for lag window {window}")]
    TooShortTrajectory { len: usize, window: usize },

    /// Gradient-descent loss diverged.
    #[error("training diverged at epoch {epoch}: loss {loss:.3e} exceeds 10x initial {initial:.3e}")]
    TrainingDiverged { epoch: usize, loss: f64, initial: f64 },

    /// Empty input where at least one element is required.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
