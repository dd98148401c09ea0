use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole of the gamma function at {0}")]
    Pole(String),

    #[error("argument outside the domain: {0}")]
    Domain(String),

    #[error("inadmissible stable parameters: {0}")]
    Inadmissible(String),

    #[error("quadrature did not converge: estimated error {estimate:.3e} exceeds tolerance {tolerance:.3e} after {levels} levels")]
    NoConvergence {
        estimate: f64,
        tolerance: f64,
        levels: usize,
    },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("operation not defined in this alpha regime: {0}")]
    Regime(String),

    #[error("step budget exhausted: path exceeded {0} steps")]
    Budget(u64),
}

impl Error {
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NoConvergence { .. })
    }
}
