use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::series::{tail_bound, Interval};
use crate::domain::{FluxModel, ValidatedScenario};
use crate::error::{Error, Result};
use crate::SeriesConfig;

/// How the whole-line profile before closure is evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreclosureForm {
    /// Modal convolution of every source, including the two inflow families
    /// that cancel term by term.
    Full,
    /// Explicit quadratic-plus-series law for a constant leak; other leak
    /// histories use the modal route.
    #[default]
    Simplified,
}

/// Pressure on the connected line at `0 ≤ t ≤ t₁` since leak onset.
///
/// The undisturbed line carries through-flow `G₀` on the linear profile
/// `P_b − 2a·G₀·x`. The leak at `ℓ₂` and any offtake excess `G_s − G₀` at
/// `L` act as sinks switched on at `t = 0`.
pub fn preclosure_profile(
    x: f64,
    t: f64,
    scenario: &ValidatedScenario,
    cfg: &SeriesConfig,
    form: PreclosureForm,
) -> Result<f64> {
    let p = scenario.params();
    let s = scenario.scenario();
    if !(0.0..=p.length).contains(&x) {
        return Err(Error::Domain(format!(
            "x = {x} m outside the line [0, {}]",
            p.length
        )));
    }
    if !(0.0..=s.closure_time).contains(&t) {
        return Err(Error::Domain(format!(
            "t = {t} s outside the pre-closure window [0, {}]",
            s.closure_time
        )));
    }
    let two_a = p.two_a;
    let base = p.p_inlet - two_a * p.flux_inlet * x;
    if t == 0.0 {
        return Ok(base);
    }
    let tol = cfg.tail_tol * base.abs().max(1.0);
    let iv = Interval::new(0.0, p.length, p.medium());
    let ell2 = s.position;
    let len = p.length;

    let leak = match (form, s.flux.as_constant()) {
        (PreclosureForm::Simplified, Some(g)) => {
            let ramp = p.medium().c2() * t / len * g;
            let quadratic =
                two_a * g * (x * x / (2.0 * len) + ell2 * ell2 / (2.0 * len) + len / 3.0 - ell2);
            let kink = if x > ell2 {
                two_a * g * (x - ell2)
            } else {
                0.0
            };
            let factor = 2.0 * two_a * len * g / (PI * PI);
            let damped = iv.damped_kernel(x, ell2, t, factor, cfg, tol)?;
            -ramp - quadratic + kink + damped
        }
        _ => -iv.response(x, t, 0.0, ell2, &s.flux, cfg, tol)?,
    };

    let excess = p.flux_outlet - p.flux_inlet;
    let offtake = if excess != 0.0 {
        -iv.response(x, t, 0.0, len, &FluxModel::constant(excess), cfg, tol)?
    } else {
        0.0
    };

    let inflow = match form {
        PreclosureForm::Full => {
            let unit = two_a * len * p.flux_inlet / (PI * PI);
            let lambda = iv.alpha() * t;
            let scaled_tol = tol / (4.0 * unit.abs()).max(f64::MIN_POSITIVE);
            let odd = weighted_cosine_sum(x / len, lambda, cfg, scaled_tol, |n| (n % 2) as f64)?;
            let parity = weighted_cosine_sum(x / len, lambda, cfg, scaled_tol, |n| {
                0.5 * (1.0 - (-1.0f64).powi(n as i32))
            })?;
            4.0 * unit * odd - 2.0 * unit * (2.0 * parity)
        }
        PreclosureForm::Simplified => 0.0,
    };

    Ok(base + leak + offtake + inflow)
}

/// `Σₙ w(n)·cos(nπX)·e^{−λn²}/n²` for weights in `[0, 1]`, truncated on the
/// tail bound.
fn weighted_cosine_sum(
    sx: f64,
    lambda: f64,
    cfg: &SeriesConfig,
    tol: f64,
    weight: impl Fn(usize) -> f64,
) -> Result<f64> {
    let mut sum = 0.0;
    let mut bound = f64::INFINITY;
    for n in 1..=cfg.n_max {
        let nf = n as f64;
        sum += weight(n) * (nf * PI * sx).cos() * (-lambda * nf * nf).exp() / (nf * nf);
        bound = tail_bound(lambda, n, 2);
        if bound <= tol {
            return Ok(sum);
        }
    }
    Err(Error::Truncation {
        n_max: cfg.n_max,
        bound,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{table_unit_to_pa, validate};
    use crate::reference;

    fn line() -> ValidatedScenario {
        let (params, scenario) = reference::scenario();
        validate(params, scenario).unwrap()
    }

    #[test]
    fn undisturbed_inlet_is_the_nominal_pressure() {
        let v = line();
        let p = preclosure_profile(
            0.0,
            0.0,
            &v,
            &SeriesConfig::default(),
            PreclosureForm::Simplified,
        )
        .unwrap();
        assert_eq!(p, 14.0e4);
    }

    #[test]
    fn closure_profile_tracks_the_first_table_row() {
        let v = line();
        let cfg = SeriesConfig::default();
        for (xk, want) in reference::TABLE1 {
            let got =
                preclosure_profile(xk * 1e3, 300.0, &v, &cfg, PreclosureForm::Simplified).unwrap();
            let want = table_unit_to_pa(want);
            assert!((got / want - 1.0).abs() < 0.03, "x {xk}: {got} vs {want}");
        }
    }

    #[test]
    fn explicit_law_and_modal_route_agree() {
        let v = line();
        let cfg = SeriesConfig::default();
        for x in [0.0, 7_300.0, 14_500.0, 21_000.0, 30_000.0] {
            for t in [5.0, 120.0, 300.0] {
                let a = preclosure_profile(x, t, &v, &cfg, PreclosureForm::Simplified).unwrap();
                let b = preclosure_profile(x, t, &v, &cfg, PreclosureForm::Full).unwrap();
                assert!((a - b).abs() < 1e-6 * a, "x {x} t {t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn out_of_window_points_are_domain_errors() {
        let v = line();
        let cfg = SeriesConfig::default();
        let f = PreclosureForm::Simplified;
        assert!(matches!(
            preclosure_profile(-1.0, 10.0, &v, &cfg, f),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            preclosure_profile(10.0, 301.0, &v, &cfg, f),
            Err(Error::Domain(_))
        ));
    }
}
