use thiserror::Error;

/// Errors produced anywhere in the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An input lies outside the domain of a formula or model.
    #[error("domain error: {0}")]
    Domain(String),

    /// The caller asked for something malformed (empty grid, zero runs, ...).
    #[error("usage error: {0}")]
    Usage(String),

    /// Slot or transaction window shorter than one round trip.
    #[error("causal closure violated: window {window_s:e} s < 2 * tau = {round_trip_s:e} s")]
    CausalClosure { window_s: f64, round_trip_s: f64 },

    /// An invariant of the simulator broke. Always a bug.
    #[error("internal logic error: {0}")]
    Logic(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn logic(msg: impl Into<String>) -> Self {
        Error::Logic(msg.into())
    }

    /// True for errors caused by bad input rather than a broken invariant.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, Error::Logic(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
