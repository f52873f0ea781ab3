use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("argument {name} = {value} outside [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(&'static str),

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),

    #[error("unsupported scenario: {0}")]
    Unsupported(&'static str),

    #[error("linear solver failure (condition estimate {condition:e}): {reason}")]
    SolverFailure {
        condition: f64,
        reason: &'static str,
    },

    #[error("every trajectory diverged ({aborted} aborted); the Euler scheme is too stiff for this control")]
    AllTrajectoriesAborted { aborted: usize },
}

impl Error {
    pub(crate) fn check_range(name: &'static str, value: f64, lo: f64, hi: f64) -> Result<()> {
        if value >= lo && value <= hi {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                name,
                value,
                lo,
                hi,
            })
        }
    }
}
