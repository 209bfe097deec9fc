use thiserror::Error;

/// Every failure the toolkit can report. Variant names double as the
/// error tags printed by the command-line front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid has zero mass")]
    ZeroMass,
    #[error("grid is not normalized (mass {mass})")]
    NotNormalized { mass: f64 },
    #[error("grid is not isotropic (mean deviation {mean_dev}, covariance deviation {cov_dev})")]
    NotIsotropic { mean_dev: f64, cov_dev: f64 },
    #[error("tensor product would have dimension {0} > 3")]
    DimensionOverflow(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("linear map is singular (|det| = {0})")]
    SingularMap(f64),
    #[error("directions are not orthonormal: {0}")]
    NotOrthonormal(String),
    #[error("grid is not centered on axis {axis}")]
    GridNotCentered { axis: usize },
    #[error("covariance is degenerate (min eigenvalue {0})")]
    DegenerateCovariance(f64),
    #[error("isotropization did not reach tolerance (mean {mean_dev}, covariance {cov_dev})")]
    IsotropizationFailed { mean_dev: f64, cov_dev: f64 },
    #[error("operation needs dimension at least 2, got {0}")]
    DimensionTooLow(usize),
    #[error("level {level} outside grid range [{lo}, {hi}]")]
    LevelOutOfRange { level: f64, lo: f64, hi: f64 },
    #[error("eps {eps} outside (0, {bound})")]
    EpsOutOfRange { eps: f64, bound: f64 },
    #[error("matrices do not sum to the identity (max deviation {0})")]
    NotIdentitySum(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0})")]
    NotPSD(f64),
    #[error("matrix is not symmetric (max asymmetry {0})")]
    NotSymmetric(f64),
    #[error("internal contract violation: {0}")]
    InternalContractViolation(String),
    #[error("W^2 + V^2 deviates from identity by {0}")]
    DiagonalConstraintViolated(f64),
    #[error("eigensolver did not converge after {0} sweeps")]
    NoConvergence(usize),
    #[error("delta {delta} must exceed twice the largest spacing {spacing}")]
    DeltaTooSmall { delta: f64, spacing: f64 },
    #[error("covariance contract violated: {0}")]
    CovarianceContractViolated(String),
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::ZeroMass => "ZeroMass",
            Error::NotNormalized { .. } => "NotNormalized",
            Error::NotIsotropic { .. } => "NotIsotropic",
            Error::DimensionOverflow(_) => "DimensionOverflow",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::SingularMap(_) => "SingularMap",
            Error::NotOrthonormal(_) => "NotOrthonormal",
            Error::GridNotCentered { .. } => "GridNotCentered",
            Error::DegenerateCovariance(_) => "DegenerateCovariance",
            Error::IsotropizationFailed { .. } => "IsotropizationFailed",
            Error::DimensionTooLow(_) => "DimensionTooLow",
            Error::LevelOutOfRange { .. } => "LevelOutOfRange",
            Error::EpsOutOfRange { .. } => "EpsOutOfRange",
            Error::NotIdentitySum(_) => "NotIdentitySum",
            Error::NotPSD(_) => "NotPSD",
            Error::NotSymmetric(_) => "NotSymmetric",
            Error::InternalContractViolation(_) => "InternalContractViolation",
            Error::DiagonalConstraintViolated(_) => "DiagonalConstraintViolated",
            Error::NoConvergence(_) => "NoConvergence",
            Error::DeltaTooSmall { .. } => "DeltaTooSmall",
            Error::CovarianceContractViolated(_) => "CovarianceContractViolated",
            Error::BadParameters(_) => "BadParameters",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
