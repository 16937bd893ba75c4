use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("chart pole: product of cosines {product:e} below pole epsilon at angle {index}")]
    ChartPole { index: usize, product: f64 },
    #[error("vector is not unit length (norm {norm})")]
    NotUnit { norm: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("coefficient system is singular (relative determinant {ratio:e})")]
    SingularChart { ratio: f64 },
    #[error("no regular approach direction found")]
    Unresolved,
    #[error("extrapolation needs at least 3 samples, got {0}")]
    InsufficientSamples(usize),
    #[error("extrapolation steps are not geometric")]
    NonGeometricSteps,
    #[error("point is singular for the map (phi = {phi:e})")]
    SingularPoint { phi: f64 },
    #[error("unknown example '{0}'")]
    UnknownExample(String),
    #[error("example '{0}' needs a stage")]
    StageRequired(String),
    #[error("example '{0}' has no stage family")]
    StageNotApplicable(String),
    #[error("example '{0}' has no printed coefficients")]
    NoPrintedCoefficients(String),
    #[error("stage {0} failed")]
    StageFailed(u32),
    #[error("dimension {0} not supported here")]
    DimensionUnsupported(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Invalid(e.to_string())
    }
}
