//! Closed-form series solutions of the linearised line.
//!
//! Post-closure sections hold their closure profile and add the modal
//! response to their boundary fluxes and leak; the pre-closure line is the
//! stationary through-flow profile plus the response to the leak.

mod inlet;
mod preclosure;
mod sections;
pub mod series;
mod states;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::LineParams;
use crate::placement::ValvePair;

pub use inlet::{inlet_pressure, InletForm, EULER_C};
pub use preclosure::{preclosure_profile, PreclosureForm};
pub use sections::{section1_pressure, section2_pressure, section3_pressure, section_pressure};
pub use states::{build_states, field_snapshot, section_field, InitialProfile, SectionFit};

/// Which span a decay constant refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecayKind {
    /// Whole line before closure, span `L`.
    Line = 1,
    /// Section 1, span `ℓ₁`.
    Upstream = 3,
    /// Section 2, span `ℓ₃ − ℓ₁`.
    Leaking = 4,
    /// Section 3, span `L − ℓ₃`.
    Downstream = 5,
}

impl DecayKind {
    pub fn from_index(k: u8) -> Option<Self> {
        match k {
            1 => Some(DecayKind::Line),
            3 => Some(DecayKind::Upstream),
            4 => Some(DecayKind::Leaking),
            5 => Some(DecayKind::Downstream),
            _ => None,
        }
    }

    pub fn span(self, params: &LineParams, pair: &ValvePair) -> f64 {
        match self {
            DecayKind::Line => params.length,
            DecayKind::Upstream => pair.ell1,
            DecayKind::Leaking => pair.ell3 - pair.ell1,
            DecayKind::Downstream => params.length - pair.ell3,
        }
    }
}

/// Modal decay rate `π²n²c²/(2a·span²)`, 1/s. `n = 0` gives 0.
pub fn decay_rate(kind: DecayKind, n: u32, params: &LineParams, pair: &ValvePair) -> f64 {
    let span = kind.span(params, pair);
    let nf = n as f64;
    PI * PI * nf * nf * params.c * params.c / (params.two_a * span * span)
}
