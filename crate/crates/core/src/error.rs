use thiserror::Error;

/// Failures raised by the simulation and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid truncation: need at least 2 Fock levels, got {0}")]
    InvalidTruncation(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("parametric instability: |lambda| = {lambda} must stay below omega_r = {omega_r}")]
    ParametricInstability { lambda: f64, omega_r: f64 },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("unsupported combination: {0}")]
    Unsupported(String),

    #[error("degenerate steady state: the generator kernel is not one-dimensional (smallest relative pivot {pivot:.3e})")]
    DegenerateSteadyState { pivot: f64 },

    #[error("convergence failure: {0}")]
    Convergence(String),

    #[error("correlation grid too short: |C(tau_max)|/|C(0)| = {ratio:.3e}; try tau_max >= {suggested_tau_max:.6e}")]
    GridTooShort { ratio: f64, suggested_tau_max: f64 },

    #[error("resonance divergence: Delta = omega_s - Omega_r vanishes")]
    ResonanceDivergence,

    #[error("divergent noise integral: kappa must be positive")]
    DivergentNoise,

    #[error("moment system unstable: generator is singular beyond the identity direction")]
    MomentInstability,

    #[error("no crossing: omega_s = {omega_s} must be below omega_r = {omega_r}")]
    NoCrossing { omega_s: f64, omega_r: f64 },

    #[error("peak at the edge of the frequency grid; widen the window")]
    PeakAtEdge,

    #[error("spectrum unresolved: {0}")]
    Unresolved(String),

    #[error("spectrum has no peaks")]
    NoPeaks,

    #[error("resource guard: {0}")]
    ResourceGuard(String),
}

pub type Result<T> = std::result::Result<T, Error>;
