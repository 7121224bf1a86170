use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("resolution {got} is too small (minimum {min})")]
    ResolutionTooSmall { got: usize, min: usize },

    #[error("geometry mismatch: expected {expected}, found {found}")]
    GeometryMismatch { expected: String, found: String },

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("field is constant: the gradient denominator vanishes")]
    ConstantField,

    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
    },

    #[error("no sign change of the linearized eigenvalue on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("identity {0} requires an Euler-Lagrange solution")]
    NeedsElSolution(String),

    #[error("unknown identity or suite: {0}")]
    Unknown(String),

    #[error("time step underflow at t = {t} (dt = {dt:e})")]
    StepFailure { t: f64, dt: f64 },

    #[error("blow-up detected at t = {t}: sup |f| = {sup}")]
    BlowupDetected { t: f64, sup: f64 },

    #[error("mass {0} outside the admissible interval (0, 8*pi)")]
    MassOutOfRange(f64),

    #[error("normalization failure: {0}")]
    NormalizationFailure(String),

    #[error("fixed point not converged after {iterations} iterations (last update {update:e})")]
    NotConverged {
        iterations: usize,
        update: f64,
        history: Vec<f64>,
    },

    #[error("perturbation has unbounded variation ({0})")]
    UnboundedVariation(f64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of an iterative numerical procedure, as opposed to
    /// rejected inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NewtonDiverged { .. }
                | Error::StepFailure { .. }
                | Error::BlowupDetected { .. }
                | Error::NotConverged { .. }
                | Error::NormalizationFailure(_)
        )
    }
}
