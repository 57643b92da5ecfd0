use thiserror::Error;

/// Failure modes shared across the library.
///
/// `Domain` marks arguments outside an operation's contract, `Range` marks
/// queries outside the data a structure actually holds, `Capacity` marks
/// exact-arithmetic or size limits, and `Pole` marks evaluation points that
/// collide with a singularity of the function being evaluated.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain: {0}")]
    Domain(String),
    #[error("range: {0}")]
    Range(String),
    #[error("capacity: {0}")]
    Capacity(String),
    #[error("pole: evaluation point {at} lies within the guard of {nearest}")]
    Pole { at: f64, nearest: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn range(msg: impl Into<String>) -> Self {
        Error::Range(msg.into())
    }
    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
}
