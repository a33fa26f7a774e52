//! Transient pressure, leak isolation and dispatch timing for a linearised
//! gas main with parallel-line connectors.
//!
//! The line obeys `P_t = (c²/2a)·P_xx` with mass-flux ends
//! (`∂P/∂x = −2a·G`) and a point leak. After the isolation valves around
//! the leak close, the line splits into a filling section, a sealed leaking
//! section and a depleting delivery section.
//!
//! * [`analytic`] sums the modal series for each section and for the line
//!   before closure.
//! * [`oracle`] solves the same problems with a θ-scheme, independently.
//! * [`dispatch`] turns the fields into operator decisions.

// Negated comparisons reject NaN on purpose; index loops mirror the stencils.
#![allow(
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop,
    clippy::too_many_arguments
)]

pub mod analytic;
pub mod dispatch;
pub mod domain;
pub mod error;
pub mod oracle;
pub mod placement;
pub mod reference;

pub use domain::{
    validate, FieldSource, FluxModel, LeakFluxModel, LeakScenario, LineMeta, LineParams, Medium,
    PointLeak, PressureField, SampledCurve, SectionId, SectionState, SeriesConfig,
    ValidatedScenario,
};
pub use error::{Error, Result};
pub use placement::{TieBreak, ValvePair};
