use thiserror::Error;

/// Library failure modes.
///
/// `Precondition` means the caller handed us inputs outside a documented
/// contract and the computation was not attempted. `Numerical` means the
/// inputs were legal but the computation could not be completed to the
/// requested accuracy (step-size collapse, overflow past a guard, a
/// diagnostic identity out of tolerance, and so on).
#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("numerical: {0}")]
    Numerical(String),
}

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn is_precondition(&self) -> bool {
        matches!(self, Error::Precondition(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
