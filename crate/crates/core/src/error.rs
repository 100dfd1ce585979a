use alloc::string::String;

/// Errors raised by the oracles, the subproblem solver and the outer loop.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unsupported cone family: {0}")]
    Unsupported(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    /// The point handed to a routine that requires strict feasibility is not
    /// strictly feasible (`g_mu(x) >= 0`).
    #[error("infeasible point: {0}")]
    Infeasible(String),

    #[error("initialization failed: {0}")]
    Initialization(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_dim(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            got,
        })
    }
}

pub(crate) fn check_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(alloc::format!(
            "{what} contains non-finite entries"
        )))
    }
}
