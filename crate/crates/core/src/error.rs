use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("mass mismatch: expected total {expected}, found {found}")]
    MassMismatch { expected: f64, found: f64 },

    #[error("system is not overloaded: p*alpha = {demand} <= mu*H = {capacity}")]
    NotOverloaded { demand: f64, capacity: f64 },

    #[error("diffusion coefficient is zero (p = 1 and cs2 = 0)")]
    DegenerateNoise,

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Quadrature(_))
    }
}
