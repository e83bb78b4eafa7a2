use thiserror::Error;

/// Errors raised by the library. The CLI maps these onto process exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("coupling function is not strictly monotone on (0, 2π)")]
    NotMonotone,

    #[error("coupling function has curvature of mixed sign on (0, 2π)")]
    MixedCurvature,

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("states are identical; no critical decomposition exists")]
    EmptyDecomposition,

    #[error("critical set is inconsistent with the supplied states: {0}")]
    InconsistentCriticalSet(String),

    #[error("oscillators {first} and {second} are synchronized; merge them into a cluster first")]
    SynchronizedPair { first: usize, second: usize },

    #[error("numerical divergence at t = {t}")]
    NumericalDivergence { t: f64 },

    #[error("initial-condition sampler failed: {0}")]
    Sampler(String),

    #[error("trial {trial}: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::Parameter {
        name,
        reason: reason.into(),
    }
}
