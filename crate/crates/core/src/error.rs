use thiserror::Error;

use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("fractional order {0} outside (0, 1]")]
    InvalidOrder(f64),

    #[error("invalid axis domain: {0}")]
    InvalidDomain(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error(
        "coordinate {coordinate} on axis {} is within {inner_offset} of the singular endpoint {endpoint}",
        .axis + 1
    )]
    EndpointContact {
        /// 0-based; displayed 1-based like `x_i`.
        axis: usize,
        coordinate: f64,
        endpoint: f64,
        inner_offset: f64,
    },

    #[error("coordinate {coordinate} on axis {} lies outside [{lo}, {hi}]", .axis + 1)]
    OutsideDomain {
        axis: usize,
        coordinate: f64,
        lo: f64,
        hi: f64,
    },

    #[error(
        "interpolation on axis {} at {coordinate} outside sampled range [{lo}, {hi}]",
        .axis + 1
    )]
    InterpolationOutOfRange {
        axis: usize,
        coordinate: f64,
        lo: f64,
        hi: f64,
    },

    #[error("invalid sampled field: {0}")]
    SampledField(String),

    #[error("{what} did not converge (estimated error {estimate:e}, tolerance {tolerance:e})")]
    NonConvergence {
        what: &'static str,
        estimate: f64,
        tolerance: f64,
    },

    #[error("invalid lagrangian: {0}")]
    Lagrangian(String),

    #[error("invalid symmetry generator: {0}")]
    Generator(String),

    #[error("sector mismatch: {0}")]
    SectorMismatch(String),

    #[error("cannot combine currents: {0}")]
    CurrentMismatch(String),

    #[error("time {0} is not positive")]
    NonPositiveTime(f64),

    #[error("integration approached the singular point t = 0 (t = {t:e}, step = {step:e})")]
    SingularityApproach { t: f64, step: f64 },

    #[error("integration constants (A, B) are not known for this trajectory")]
    Unfitted,

    #[error("invalid oscillator parameters: {0}")]
    Oscillator(String),
}

impl Error {
    /// Errors caused by malformed input, as opposed to failures of a numeric
    /// procedure on valid input.
    pub fn is_configuration(&self) -> bool {
        match self {
            Error::Expr(e) => e.is_parse(),
            Error::InvalidOrder(_)
            | Error::InvalidDomain(_)
            | Error::InvalidGrid(_)
            | Error::DimensionMismatch { .. }
            | Error::SampledField(_)
            | Error::Lagrangian(_)
            | Error::Generator(_)
            | Error::SectorMismatch(_)
            | Error::Oscillator(_) => true,
            _ => false,
        }
    }
}
