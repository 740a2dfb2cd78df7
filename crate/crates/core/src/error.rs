use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("link phase under-resolved: plaquette flux {flux:.3} exceeds 1 (reduce the spacing below {max_spacing:.4})")]
    UnderResolved { flux: f64, max_spacing: f64 },

    #[error("ball of radius {radius} around ({cx}, {cy}) does not fit in the grid box; half-width must be at least {required}")]
    BallOutsideBox {
        radius: f64,
        cx: f64,
        cy: f64,
        required: f64,
    },

    #[error("dimension {dim} exceeds the dense solver cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("not converged: {0}")]
    NotConverged(String),

    #[error("config error at `{path}`: {reason}")]
    Config { path: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.to_string(),
        reason: reason.into(),
    }
}
