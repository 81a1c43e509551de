//! Measurement statistics of two (or three) Bose condensates prepared in Fock
//! states: single-splitter interference, Bell correlations, population
//! oscillations and phase emergence, evaluated exactly where possible.

pub mod bell;
pub mod emergence;
pub mod extensions;
pub mod field;
pub mod modes;
pub mod numerics;
pub mod poposc;
pub mod report;
pub mod single_splitter;

pub use field::AngleField;
pub use modes::{DetectionRecord, DoubleFock, ModeNetwork};
pub use numerics::{ExactRational, LogWeight, PeriodicGrid};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
    #[error(transparent)]
    Modes(#[from] modes::ModesError),
}

pub type Result<T> = std::result::Result<T, FockError>;

pub(crate) fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(FockError::Precondition(msg()))
    }
}
