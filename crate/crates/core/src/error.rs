use thiserror::Error;

/// Errors raised by the simulator.
///
/// Numerical payloads are carried as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid chain specification: {0}")]
    InvalidSpec(String),

    #[error("eigenstate {index} has non-integer excitation number {value}")]
    NonIntegerExcitation { index: usize, value: f64 },

    #[error("no open scattering channel at energy {energy}")]
    NoOpenChannel { energy: f64 },

    #[error("energy {energy} lies on the threshold of channel {channel}")]
    SingularKMatrix { energy: f64, channel: usize },

    #[error("scattering system ill-conditioned at energy {energy} (condition {condition:e})")]
    LinearSolveFailure { energy: f64, condition: f64 },

    #[error("energy {energy} is at or below a single-qubit threshold")]
    ThresholdEnergy { energy: f64 },

    #[error("momentum must be positive, got {0}")]
    InvalidMomentum(f64),

    #[error(
        "quadrature not converged: node doubling changed element {witness:?} by {max_change:e}"
    )]
    QuadratureNotConverged { max_change: f64, witness: [usize; 4] },

    #[error("band-resolved variants need epsilon < h/4 (epsilon = {epsilon}, h = {h})")]
    BandOverlap { epsilon: f64, h: f64 },

    #[error("map is not completely positive: Choi eigenvalue {min_eigenvalue:e}")]
    NotCompletelyPositive { min_eigenvalue: f64 },

    #[error("operation requires the {expected} variant, got {found}")]
    WrongVariant { expected: &'static str, found: &'static str },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigenvector matrix ill-conditioned (condition {condition:e}); use RK4")]
    IllConditionedSpectral { condition: f64 },

    #[error("steady state not unique: two eigenvalues {first:e} and {second:e} are within 1e-10 of zero")]
    DegenerateSteadyState { first: f64, second: f64 },

    #[error("steady state has negative eigenvalue {min_eigenvalue:e}")]
    NegativeSteadyState { min_eigenvalue: f64 },

    #[error("Bohr gap between levels {j} and {k} is degenerate ({gap:e})")]
    DegenerateGap { j: usize, k: usize, gap: f64 },

    #[error("negative transition rate {value:e} for {from} -> {to}")]
    NegativeRate { from: usize, to: usize, value: f64 },

    #[error("time grid must be non-decreasing")]
    NonMonotoneTimes,

    #[error("eigen-decomposition did not converge: {0}")]
    EigenFailure(&'static str),

    #[error("malformed {what} at line {line}: {message}")]
    Format { what: &'static str, line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
