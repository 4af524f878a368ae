use thiserror::Error;

/// Failures raised by the numerical and geometric routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("insufficient depth: need {needed} continued-fraction entries, have {available}")]
    InsufficientDepth { needed: usize, available: usize },

    #[error("rational rotation angle: {0}")]
    RationalAngle(String),

    #[error("degenerate radius fit: {0}")]
    DegenerateFit(String),

    #[error("radius estimate {0} is not below 4")]
    RadiusOutOfRange(f64),

    #[error("truncation tail bound {bound:e} exceeds tolerance {tolerance:e} at r = {radius}")]
    TailTooLarge {
        radius: f64,
        bound: f64,
        tolerance: f64,
    },

    #[error("coincident points at indices {i} and {j}")]
    CoincidentPoints { i: usize, j: usize },

    #[error("sampling grids differ: {left} vs {right} samples")]
    GridMismatch { left: usize, right: usize },

    #[error("insufficient scales: {0}")]
    InsufficientScales(String),

    #[error("no candidates to evaluate")]
    NoCandidates,

    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Stable variant name, used by the command line front end on stderr.
    pub fn name(&self) -> &'static str {
        match self {
            Error::PrecisionExhausted(_) => "PrecisionExhausted",
            Error::InsufficientDepth { .. } => "InsufficientDepth",
            Error::RationalAngle(_) => "RationalAngle",
            Error::DegenerateFit(_) => "DegenerateFit",
            Error::RadiusOutOfRange(_) => "RadiusOutOfRange",
            Error::TailTooLarge { .. } => "TailTooLarge",
            Error::CoincidentPoints { .. } => "CoincidentPoints",
            Error::GridMismatch { .. } => "GridMismatch",
            Error::InsufficientScales(_) => "InsufficientScales",
            Error::NoCandidates => "NoCandidates",
            Error::DegenerateCurve(_) => "DegenerateCurve",
            Error::InvalidArgument(_) => "InvalidArgument",
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

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
