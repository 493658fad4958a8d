use thiserror::Error;

use crate::model::Regime;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("total mass must be positive (got {0})")]
    NonPositiveMass(f64),
    #[error("invalid coupling: {0}")]
    InvalidCoupling(String),
    #[error("|magnetization| {mag} exceeds mass {mass}")]
    MagnetizationExceedsMass { mag: f64, mass: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("{0} requires alpha > 0")]
    WrongSign(&'static str),
    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),
    #[error("root not found: {0}")]
    RootNotFound(String),
    #[error("degenerate regime: {0}")]
    DegenerateRegime(String),
    #[error("well violation: {0}")]
    WellViolation(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("profile stalled at beta = {0}")]
    StallDetected(f64),
    #[error("step collapse after {iters} iterations")]
    StepCollapse { iters: usize },
    #[error("constraint projection infeasible: {0}")]
    ProjectionInfeasible(String),
    #[error("geometry too tight: {0}")]
    GeometryTooTight(String),
    #[error("singular correction jacobian")]
    JacobianSingular,
    #[error("interface tension g_ab must be positive")]
    ZeroTension,
    #[error("no contact angle: (g_0b - g_0a)/g_ab = {0} lies outside [-1, 1]")]
    NoEquilibrium(f64),
    #[error("interface does not meet the boundary")]
    NoContact,
    #[error("usage: {0}")]
    Usage(String),
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Process exit code used by the CLI: 2 for bad input, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonPositiveMass(_)
            | Error::InvalidCoupling(_)
            | Error::MagnetizationExceedsMass { .. }
            | Error::InvalidParameter(_)
            | Error::WrongSign(_)
            | Error::RegimeMismatch(_)
            | Error::ZeroTension
            | Error::Usage(_)
            | Error::Io(_) => 2,
            _ => 3,
        }
    }

    pub(crate) fn mismatch(expected: &str, found: Regime) -> Self {
        Error::RegimeMismatch(format!("expected {expected}, parameters classify as {found}"))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
