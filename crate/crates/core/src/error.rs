use thiserror::Error;

/// Errors raised by the analytic and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("log-gamma pole at non-positive integer {0}")]
    GammaPole(f64),

    #[error("no separating contour: lower pole at {left_pole} (factor {left_index}) is not left of upper pole at {right_pole} (factor {right_index})")]
    ContourOverlap {
        left_index: usize,
        left_pole: f64,
        right_index: usize,
        right_pole: f64,
    },

    #[error("Mellin-Barnes integral diverges on a vertical contour (decay exponent {decay}, algebraic order {order})")]
    Divergent { decay: f64, order: f64 },

    #[error("quadrature did not converge: error estimate {estimate:e} after {nodes} nodes")]
    NonConvergence { estimate: f64, nodes: usize },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("expansion has {terms} terms, above the cap of {cap}")]
    ExpansionTooLarge { terms: usize, cap: usize },

    #[error("series did not converge: {0}")]
    SeriesNonConvergence(String),

    #[error("probability {value} outside [0, 1] beyond tolerance")]
    OutOfRange { value: f64 },

    #[error("distribution table does not normalize: mass {mass}")]
    TableNormalization { mass: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field: field.into(),
        reason: reason.into(),
    }
}
