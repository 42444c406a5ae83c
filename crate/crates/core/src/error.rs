use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("operator is not monotone: {0}")]
    Monotonicity(String),

    #[error("saddle function is not convex-concave: {0}")]
    Convexity(String),

    #[error("invalid parameters: {0}")]
    Construction(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("graph is not regular: vertex {u} has degree {du} but vertex {v} has degree {dv}")]
    Regularity {
        u: usize,
        du: usize,
        v: usize,
        dv: usize,
    },

    #[error("graph is not connected ({components} components)")]
    Connectivity { components: usize },

    #[error("cannot embed solution: residual {residual:e} exceeds {tolerance:e}")]
    Embedding { residual: f64, tolerance: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }
}
