use thiserror::Error;

/// Every failure the library can report.
///
/// Variants that come from input validation carry the dotted key of the
/// offending field (for example `line.eps`) so front ends can point at it.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("UnitError: `{field}` must be a positive finite number (got {value})")]
    Unit { field: &'static str, value: f64 },

    #[error("GeometryError: `{field}`: {reason}")]
    Geometry { field: &'static str, reason: String },

    #[error("ThresholdError: `{field}` must exceed 1 (got {value})")]
    Threshold { field: &'static str, value: f64 },

    #[error("OnConnectorError: leak at {position} m coincides with connector {index}")]
    OnConnector { position: f64, index: u32 },

    #[error("DomainError: {0}")]
    Domain(String),

    #[error("TruncationError: tail bound {bound:.3e} Pa still above tolerance {tolerance:.3e} Pa after {n_max} terms")]
    Truncation {
        n_max: usize,
        bound: f64,
        tolerance: f64,
    },

    #[error("AlreadyViolated: inlet pressure {inlet} Pa at closure already at or above the limit {limit} Pa")]
    AlreadyViolated { inlet: f64, limit: f64 },

    #[error("NoRoot: inlet pressure does not reach {limit} Pa before t = {horizon} s")]
    NoRoot { limit: f64, horizon: f64 },

    #[error(
        "StabilityError: dt = {dt} s exceeds the explicit bound {limit} s for theta = {theta}"
    )]
    Stability { dt: f64, limit: f64, theta: f64 },

    #[error("GridError: {0}")]
    Grid(String),

    #[error("InsufficientData: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Unit { field, value })
    }
}

pub(crate) fn non_negative(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::Unit { field, value })
    }
}
