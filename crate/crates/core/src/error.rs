use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid signal: {0}")]
    InvalidSignal(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("signals live on different grids")]
    GridMismatch,

    #[error("time {time} is not on the grid (dt = {dt})")]
    OffGrid { time: f64, dt: f64 },

    #[error("source support exceeds the window [{t2}, {t1}]")]
    SupportOutsideWindow { t1: f64, t2: f64 },

    #[error("divergent quantity: {0}")]
    Divergent(String),

    #[error("singular operator: {0}")]
    Singular(String),

    #[error("resolution too coarse: {0}")]
    Unresolved(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("problem too large: {0}")]
    TooLarge(String),

    #[error("collision at step {step}: separation {separation:e} below {threshold:e}")]
    Collision {
        step: usize,
        separation: f64,
        threshold: f64,
    },

    #[error("orbit is not bound (energy {0})")]
    Unbound(f64),

    #[error("classification failed: {0}")]
    Classification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
