use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The potential fails `D²u + I > 0` on its grid.
    #[error("potential is not strictly convex (margin {margin:.6e})")]
    NotConvex { margin: f64 },

    #[error("slice {slice} is not strictly convex (margin {margin:.6e})")]
    SliceNotConvex { slice: usize, margin: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    ConvergenceFailure {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("convexity lost at Newton step {step} (min 1+u_xx = {margin:.3e})")]
    ConvexityLost { step: usize, margin: f64 },

    #[error("residual {residual:.3e} exceeds the acceptance bound {bound:.3e}")]
    ResidualTooLarge { residual: f64, bound: f64 },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::NotConvex { .. } => "NotConvex",
            Error::SliceNotConvex { .. } => "SliceNotConvex",
            Error::ConvergenceFailure { .. } => "ConvergenceFailure",
            Error::ConvexityLost { .. } => "ConvexityLost",
            Error::ResidualTooLarge { .. } => "ResidualTooLarge",
            Error::InvariantViolation(_) => "InvariantViolation",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}
