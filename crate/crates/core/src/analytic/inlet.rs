use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::sections::section1_pressure;
use crate::analytic::series::Interval;
use crate::domain::{SectionId, SectionState};
use crate::error::{Error, Result};
use crate::SeriesConfig;

/// Euler's constant as used by the simplified inlet law.
pub const EULER_C: f64 = 0.577215;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InletForm {
    /// Exact series at `x = 0`, identical to section 1 there.
    Series,
    /// Linear-in-time law with the Euler-constant ramp.
    Simplified,
}

/// Pressure at the compressor-station end of section 1.
///
/// The series form with constant inflow `G` (gradient term folded in) reads
/// `P(0,t₁) + c²Gτ/ℓ₁ + 2aℓ₁G/3 − (2·2aℓ₁G/π²)·Σ e^{−α₃n²τ}/n²`. The
/// simplified form keeps the raw station inflow `G₀`:
/// `P(0,t₁) + (2 − C)·c²G₀τ/ℓ₁ + 2aℓ₁G₀·(1/3 − 1/π²)`.
pub fn inlet_pressure(
    state: &SectionState,
    t: f64,
    cfg: &SeriesConfig,
    form: InletForm,
) -> Result<f64> {
    if state.id != SectionId::Upstream {
        return Err(Error::Domain(
            "the inlet law applies to the upstream section only".into(),
        ));
    }
    if !(t >= state.t1) {
        return Err(Error::Domain(format!(
            "t = {t} s precedes the closure time {} s",
            state.t1
        )));
    }
    let p0 = state.p_init.eval(state.x_lo);
    let tau = t - state.t1;
    let ell1 = state.len();
    let c2 = state.medium.c2();
    let two_a = state.medium.two_a;
    match form {
        InletForm::Series => {
            let Some(g0) = state.flux_lo.as_constant() else {
                return section1_pressure(state, state.x_lo, t, cfg);
            };
            if tau == 0.0 {
                return Ok(p0);
            }
            let g = g0 + state.g_lo / two_a;
            let iv = Interval::new(state.x_lo, state.x_hi, state.medium);
            let factor = 2.0 * two_a * ell1 * g / (PI * PI);
            let tol = cfg.tail_tol * p0.abs().max(1.0);
            let damped = iv.damped_kernel(state.x_lo, state.x_lo, tau, factor, cfg, tol)?;
            Ok(p0 + c2 * g * tau / ell1 + two_a * ell1 * g / 3.0 - damped)
        }
        InletForm::Simplified => {
            let g0 = state.flux_lo.value_at(state.t1);
            Ok(p0
                + (2.0 - EULER_C) * c2 * g0 * tau / ell1
                + two_a * ell1 * g0 * (1.0 / 3.0 - 1.0 / (PI * PI)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{FluxModel, Medium, SampledCurve};

    fn state(flux: FluxModel) -> SectionState {
        SectionState::upstream(
            Medium {
                c: 383.3,
                two_a: 0.1,
            },
            300.0,
            10_000.0,
            SampledCurve::new(vec![0.0, 10_000.0], vec![1.336e5, 1.219e5]).unwrap(),
            flux,
            -0.5,
        )
        .unwrap()
    }

    #[test]
    fn series_law_equals_section_one_at_the_inlet() {
        let s = state(FluxModel::constant(10.0));
        let cfg = SeriesConfig::default();
        for t in [300.0, 310.0, 600.0, 900.0] {
            let law = inlet_pressure(&s, t, &cfg, InletForm::Series).unwrap();
            let field = section1_pressure(&s, 0.0, t, &cfg).unwrap();
            assert!(
                (law - field).abs() < 1e-6 * field,
                "t {t}: {law} vs {field}"
            );
        }
    }

    #[test]
    fn series_law_starts_at_the_closure_pressure() {
        let s = state(FluxModel::constant(10.0));
        let p = inlet_pressure(&s, 300.0, &SeriesConfig::default(), InletForm::Series).unwrap();
        assert_eq!(p, 1.336e5);
    }

    #[test]
    fn simplified_law_is_linear_in_time() {
        let s = state(FluxModel::constant(10.0));
        let cfg = SeriesConfig::default();
        let f = |t| inlet_pressure(&s, t, &cfg, InletForm::Simplified).unwrap();
        let slope = (2.0 - EULER_C) * 383.3 * 383.3 * 10.0 / 10_000.0;
        assert!(((f(500.0) - f(400.0)) / 100.0 - slope).abs() < 1e-9);
    }

    #[test]
    fn ramped_inflow_falls_back_to_the_field() {
        let s = state(FluxModel::piecewise(vec![300.0, 600.0], vec![10.0, 12.0]));
        let cfg = SeriesConfig::default();
        let law = inlet_pressure(&s, 500.0, &cfg, InletForm::Series).unwrap();
        assert_eq!(law, section1_pressure(&s, 0.0, 500.0, &cfg).unwrap());
    }
}
