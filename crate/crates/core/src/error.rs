use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("capacity exceeded: {0}")]
    Capacity(&'static str),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("training diverged at episode {episode} ({phase})")]
    Divergence { episode: usize, phase: &'static str },
    #[error("step-2 loss requires a frozen encoder snapshot")]
    MissingSnapshot,
    #[error("coordinate descent did not converge after {0} sweeps")]
    NotConverged(usize),
    #[error("id mismatch: {0}")]
    IdMismatch(String),
    #[error("probability {0} is outside the open interval (0, 1)")]
    ProbabilityOutOfRange(f64),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn ensure_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
