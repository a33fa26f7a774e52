use crate::analytic::series::Interval;
use crate::domain::{FluxModel, SectionId, SectionState};
use crate::error::{Error, Result};
use crate::SeriesConfig;

fn check_point(state: &SectionState, x: f64, t: f64) -> Result<()> {
    if !state.contains(x) {
        return Err(Error::Domain(format!(
            "x = {x} m outside section {} [{}, {}]",
            state.id.number(),
            state.x_lo,
            state.x_hi
        )));
    }
    if !(t >= state.t1) {
        return Err(Error::Domain(format!(
            "t = {t} s precedes the closure time {} s",
            state.t1
        )));
    }
    Ok(())
}

/// Closure profile plus the response to every boundary flux and the leak.
///
/// Works for any section; the `section*` wrappers add the layout check.
pub fn section_pressure(state: &SectionState, x: f64, t: f64, cfg: &SeriesConfig) -> Result<f64> {
    check_point(state, x, t)?;
    let base = state.p_init.eval(x);
    let tol = cfg.tail_tol * base.abs().max(1.0);
    let iv = Interval::new(state.x_lo, state.x_hi, state.medium);
    let t1 = state.t1;
    let two_a = state.medium.two_a;

    let mut p = base;
    let mut add = |sign: f64, xi: f64, q: &FluxModel| -> Result<()> {
        if !q.is_zero() {
            p += sign * iv.response(x, t, t1, xi, q, cfg, tol)?;
        }
        Ok(())
    };
    add(1.0, state.x_lo, &state.flux_lo)?;
    add(1.0, state.x_lo, &FluxModel::constant(state.g_lo / two_a))?;
    add(-1.0, state.x_hi, &state.flux_hi)?;
    add(-1.0, state.x_hi, &FluxModel::constant(state.g_hi / two_a))?;
    if let Some(leak) = &state.leak {
        add(-1.0, leak.position, &leak.flux)?;
    }
    Ok(p)
}

fn expect(state: &SectionState, id: SectionId) -> Result<()> {
    if state.id == id {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "expected a section {} state, got section {}",
            id.number(),
            state.id.number()
        )))
    }
}

/// Filling section `[0, ℓ₁]`.
pub fn section1_pressure(state: &SectionState, x: f64, t: f64, cfg: &SeriesConfig) -> Result<f64> {
    expect(state, SectionId::Upstream)?;
    section_pressure(state, x, t, cfg)
}

/// Sealed leaking section `[ℓ₁, ℓ₃]`.
pub fn section2_pressure(state: &SectionState, x: f64, t: f64, cfg: &SeriesConfig) -> Result<f64> {
    expect(state, SectionId::Leaking)?;
    section_pressure(state, x, t, cfg)
}

/// Delivery section `[ℓ₃, L]`.
pub fn section3_pressure(state: &SectionState, x: f64, t: f64, cfg: &SeriesConfig) -> Result<f64> {
    expect(state, SectionId::Downstream)?;
    section_pressure(state, x, t, cfg)
}
