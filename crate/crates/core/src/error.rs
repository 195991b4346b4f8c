use thiserror::Error;

/// Everything that can go wrong while evaluating a T-matrix representation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TMatrixError {
    #[error("energy must be strictly negative, got {0}")]
    NonNegativeEnergy(f64),

    #[error("invalid two-body system: {0}")]
    InvalidSystem(String),

    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },

    #[error("forward singularity: omega = 0 (k = k' and cos(theta) = 1)")]
    ForwardSingularity,

    #[error("backward point omega = pi is a 0/0 limit not available with the selected acceleration")]
    BackwardIndeterminate,

    #[error("gamma = {0} is a negative integer: bound-state pole of the series")]
    BoundStatePole(f64),

    #[error("series did not reach rel tol {target:e} within {max_terms} terms (best error {achieved:e})")]
    ConvergenceFailure {
        target: f64,
        achieved: f64,
        max_terms: usize,
    },

    #[error("integral diverges at rho = 0 for gamma = {0} <= -1")]
    NonIntegrable(f64),

    #[error("gamma = {0} <= -1 is outside the integral representation; use the series representation")]
    AttractiveOutOfRange(f64),

    #[error("quadrature did not reach tolerance {requested:e} (estimated error {achieved:e})")]
    QuadratureFailure { requested: f64, achieved: f64 },

    #[error("gamma = {0} makes the separated representation degenerate (cot(gamma*pi) singular)")]
    DegenerateGamma(f64),

    #[error("gamma = {0} is outside the supported range |gamma| <= 4")]
    GammaOutOfRange(f64),

    #[error("no explicit closed form for gamma = {0}")]
    NoClosedForm(f64),

    #[error("gamma = {0} is not a rational n/m with a small denominator")]
    NotRational(f64),

    #[error("partial-wave projection diverges at k = k' (forward omega = 0 singularity is not integrable over angle)")]
    OnShellDiagonal,

    #[error("partial wave l = {0} exceeds the supported maximum of 20")]
    PartialWaveTooHigh(u32),

    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, TMatrixError>;

impl TMatrixError {
    /// Stable upper-case identifier, used as a row flag in tabular output.
    pub fn code(&self) -> &'static str {
        match self {
            TMatrixError::NonNegativeEnergy(_) => "NON_NEGATIVE_ENERGY",
            TMatrixError::InvalidSystem(_) => "INVALID_SYSTEM",
            TMatrixError::OutOfRange { .. } => "OUT_OF_RANGE",
            TMatrixError::ForwardSingularity => "FORWARD_SINGULAR",
            TMatrixError::BackwardIndeterminate => "BACKWARD_INDETERMINATE",
            TMatrixError::BoundStatePole(_) => "BOUND_STATE_POLE",
            TMatrixError::ConvergenceFailure { .. } => "CONVERGENCE_FAILURE",
            TMatrixError::NonIntegrable(_) => "NON_INTEGRABLE",
            TMatrixError::AttractiveOutOfRange(_) => "ATTRACTIVE_OUT_OF_RANGE",
            TMatrixError::QuadratureFailure { .. } => "QUADRATURE_FAILURE",
            TMatrixError::DegenerateGamma(_) => "DEGENERATE_GAMMA",
            TMatrixError::GammaOutOfRange(_) => "GAMMA_OUT_OF_RANGE",
            TMatrixError::NoClosedForm(_) => "NO_CLOSED_FORM",
            TMatrixError::NotRational(_) => "NOT_RATIONAL",
            TMatrixError::OnShellDiagonal => "ON_SHELL_DIAGONAL",
            TMatrixError::PartialWaveTooHigh(_) => "PARTIAL_WAVE_TOO_HIGH",
            TMatrixError::Internal(_) => "INTERNAL",
        }
    }
}
