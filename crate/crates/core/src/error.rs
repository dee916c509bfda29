use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("order {order} exceeds the supported maximum {max}")]
    OrderOutOfRange { order: usize, max: usize },

    #[error("time must be non-negative, got {0}")]
    NegativeTime(f64),

    #[error("state is at step {expected} but step {got} was requested")]
    StepMismatch { expected: usize, got: usize },

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("blowup detected at t = {t}")]
    Blowup { t: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
