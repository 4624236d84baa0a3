use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("count cap exceeded: more than {cap} lattice points")]
    CountCapExceeded { cap: u64 },

    #[error("size budget exceeded: {what} needs about {needed} entries (budget {budget})")]
    BudgetExceeded { what: String, needed: u128, budget: u128 },

    #[error("quadrature resolution {resolution} cannot integrate degree {degree} exactly")]
    ResolutionTooSmall { resolution: usize, degree: usize },

    #[error("solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("toric truncation too small: {0}")]
    TruncationTooSmall(String),

    #[error("calibration failed: {0}")]
    Calibration(String),

    #[error("spectrum too short: need {required} values, have {available}")]
    SpectrumTooShort { required: usize, available: usize },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("ill-conditioned evaluation matrix: {0}")]
    IllConditioned(String),

    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("experiment `{name}` failed: {source}")]
    Experiment { name: String, source: Box<Error> },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
