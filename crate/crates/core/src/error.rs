use thiserror::Error;

/// Errors raised by the geometry engine.
///
/// Scalar payloads are carried as `f64` regardless of the working precision.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("event {event:?} is outside the chart domain: {reason}")]
    OutOfChart { event: [f64; 4], reason: String },

    #[error("metric at {event:?} does not have signature (-,+,+,+) (eigenvalues {eigenvalues:?})")]
    NotLorentzian {
        event: [f64; 4],
        eigenvalues: [f64; 4],
    },

    #[error("degenerate surface specification: {0}")]
    DegenerateSpec(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("induced metric is not positive definite at node ({i}, {j})")]
    DegenerateInducedMetric { i: usize, j: usize },

    #[error("surface is not admissible: min <H,H> = {min} at node ({i}, {j}) below threshold {threshold}")]
    NotAdmissible {
        min: f64,
        i: usize,
        j: usize,
        threshold: f64,
    },

    #[error("vector is not normal to the surface (tangential fraction {fraction})")]
    NotNormal { fraction: f64 },

    #[error("Poisson right-hand side is incompatible: |mean| = {mean}, allowed {allowed}")]
    Incompatible { mean: f64, allowed: f64 },

    #[error(
        "solver did not converge after {iterations} iterations (relative residual {residual})"
    )]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("Euler characteristic is ambiguous: integral/2pi = {raw} (rounding gap {gap})")]
    AmbiguousTopology { raw: f64, gap: f64 },

    #[error("surface must be a topological sphere, found chi = {chi}")]
    TopologyMismatch { chi: i64 },

    #[error("sup|beta| = {sup} exceeds the allowed bound {bound}")]
    BetaOutOfRange { sup: f64, bound: f64 },

    #[error("Theta is not nondecreasing on (-1, 1): Theta'({x}) = {derivative}")]
    ThetaNotMonotone { x: f64, derivative: f64 },

    #[error("flow step failed at s = {s} after {retries} retries: {reason}")]
    StepFailed {
        s: f64,
        retries: usize,
        reason: String,
    },

    #[error("metric table: {0}")]
    Table(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
