use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({x:.3}, {y:.3}) lies outside every hall of the layout")]
    OutOfLayout { x: f64, y: f64 },

    #[error("point ({x:.3}, {y:.3}) lies outside the grid extent")]
    OutOfGrid { x: f64, y: f64 },

    #[error("angle to transmitter undefined: receiver at the transmitter position")]
    UndefinedAngle,

    #[error("distance {0} m is below the 1 m model reference distance")]
    BelowReferenceDistance(f64),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },

    #[error("unknown beam {0}")]
    UnknownBeam(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("route {route} leaves the layout at sample {sample} ({x:.3}, {y:.3})")]
    RouteOutOfLayout {
        route: String,
        sample: usize,
        x: f64,
        y: f64,
    },

    #[error("exhaustive search would evaluate {0} masks (limit 1000000); use the genetic solver")]
    SearchTooLarge(u128),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
