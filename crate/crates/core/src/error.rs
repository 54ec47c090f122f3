use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("argument outside the open unit disc: |ζ| = {0}")]
    OutsideDisc(f64),

    #[error("point is not on the boundary: r = {0:e}")]
    NotOnBoundary(f64),

    #[error("point is not interior: r = {0:e}")]
    NotInterior(f64),

    #[error("point is exterior to the domain: r = {0:e}")]
    Exterior(f64),

    #[error("gradient of the defining function vanishes (|∇r| = {0:e})")]
    VanishingGradient(f64),

    #[error("near-tangential direction: ⟨v,ν_p⟩ = {0:e} is below the cutoff")]
    NearTangential(f64),

    #[error("direction not admissible: ⟨v,ν_p⟩ = {re:e}{im:+e}i must be real and positive")]
    InadmissibleDirection { re: f64, im: f64 },

    #[error("Gauss–Newton stagnated with residual {residual:e} after {iterations} iterations")]
    SolverStagnation { residual: f64, iterations: usize },

    #[error("Newton iteration failed: {0}")]
    NewtonFailure(String),

    #[error("negative-mode energy {0:e} above tolerance; map is not stationary")]
    NotStationary(f64),

    #[error("winding number {0} (expected 1); point outside the domain of validity")]
    WindingNumber(i64),

    #[error("contour sample within tolerance of zero")]
    SampleNearZero,

    #[error("denominator {0:e} too small")]
    DenominatorTooSmall(f64),

    #[error("limit estimate did not converge (spread {0:e})")]
    NonConvergent(f64),

    #[error("function is not a self-map of the disc: {0}")]
    NotSelfMap(String),

    #[error("estimates disagree: {0}")]
    Disagreement(String),

    #[error("insufficient clearance {clearance:e} for step {step:e}")]
    InsufficientClearance { clearance: f64, step: f64 },

    #[error("geodesic certificate failed: {0}")]
    CertificateFailed(String),

    #[error("json: {0}")]
    Json(String),
}

impl Error {
    /// True when the error is caused by invalid caller input rather than a numerical failure.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidInput(_)
                | Error::NonFinite(_)
                | Error::OutsideDisc(_)
                | Error::NotOnBoundary(_)
                | Error::NotInterior(_)
                | Error::Exterior(_)
                | Error::InadmissibleDirection { .. }
                | Error::InsufficientClearance { .. }
                | Error::Json(_)
        )
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
