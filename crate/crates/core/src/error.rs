use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("config parse error: {0}")]
    ConfigParse(#[from] serde_json::Error),

    /// The wave function nearly vanishes at the requested point, so the
    /// guidance velocity is ill-defined.
    #[error("configuration ({y1}, {y2}) at t={t} is within the node threshold (relative amplitude {ratio:e})")]
    NodeProximity { y1: f64, y2: f64, t: f64, ratio: f64 },

    #[error("regime violation: {0}")]
    RegimeViolation(String),

    #[error("sampling failure: {0}")]
    SamplingFailure(String),

    #[error("abort quota exceeded: {aborted} of {total} trajectories aborted")]
    AbortQuota { aborted: usize, total: usize },

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error("opposite-side probability mass {0:e} is too small to condition on")]
    DegenerateSupport(f64),

    #[error("pattern grids are not commensurable: {0}")]
    GridMismatch(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}
