use thiserror::Error;

/// Errors raised across fitting, evaluation, and generation.
#[derive(Debug, Error)]
pub enum OismError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("capacity exceeded: {what} (required {required}, available {available})")]
    Capacity {
        what: String,
        required: usize,
        available: usize,
    },
    #[error("domain violation at row {row}: {detail}")]
    Domain { row: usize, detail: String },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("ill-conditioned system at t = {t}: condition estimate {estimate:.3e}")]
    IllConditioned { t: f64, estimate: f64 },
    #[error("solve failed at tau = {tau}: {source}")]
    AtTau {
        tau: f64,
        #[source]
        source: Box<OismError>,
    },
    #[error("integration did not converge after {steps} steps (reached tau = {reached})")]
    NonConvergence {
        steps: usize,
        reached: f64,
        state: Vec<f64>,
    },
    #[error("{failed} of {total} trajectories failed; first failure: {first}")]
    Trajectories {
        failed: usize,
        total: usize,
        first: Box<OismError>,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, OismError>;

impl OismError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        OismError::InvalidInput(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            OismError::InvalidInput(_) | OismError::Config(_) | OismError::Json(_) => 2,
            OismError::Capacity { .. } => 2,
            OismError::IllConditioned { .. } | OismError::NonConvergence { .. } => 3,
            OismError::AtTau { source, .. } => source.exit_code(),
            OismError::Trajectories { first, .. } => first.exit_code(),
            OismError::Domain { .. } | OismError::Degenerate(_) => 4,
            OismError::Unsupported(_) => 5,
            OismError::Io(_) | OismError::Csv(_) => 2,
        }
    }
}
