use serde::{Deserialize, Serialize};

use crate::analytic::preclosure::{preclosure_profile, PreclosureForm};
use crate::analytic::sections::section_pressure;
use crate::domain::{
    FieldSource, FluxModel, PointLeak, PressureField, SampledCurve, SectionState, ValidatedScenario,
};
use crate::error::{Error, Result};
use crate::SeriesConfig;

/// Where the closure profile `P(x, t₁)` comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialProfile {
    /// Sample the pre-closure line at `t₁`.
    Preclosure {
        #[serde(default)]
        form: PreclosureForm,
        /// Sampling intervals per section; the leak point is always a node.
        #[serde(default = "default_intervals")]
        intervals: usize,
    },
    /// Measured or tabulated pressures (Pa) at positions (m) covering `[0, L]`.
    Samples { x: Vec<f64>, p: Vec<f64> },
}

fn default_intervals() -> usize {
    100
}

impl Default for InitialProfile {
    fn default() -> Self {
        InitialProfile::Preclosure {
            form: PreclosureForm::default(),
            intervals: default_intervals(),
        }
    }
}

/// Boundary gradient terms and closure profile used to set up the sections.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionFit {
    /// dP/dx correction at the inlet of section 1, Pa/m.
    #[serde(default)]
    pub g_lo: f64,
    /// dP/dx correction at the outlet of section 3, Pa/m.
    #[serde(default)]
    pub g_hi: f64,
    #[serde(default)]
    pub initial: InitialProfile,
}

fn closure_profile(
    v: &ValidatedScenario,
    fit: &SectionFit,
    cfg: &SeriesConfig,
) -> Result<SampledCurve> {
    match &fit.initial {
        InitialProfile::Samples { x, p } => SampledCurve::new(x.clone(), p.clone()),
        InitialProfile::Preclosure { form, intervals } => {
            let pair = v.pair();
            let length = v.params().length;
            let n = (*intervals).max(1);
            let mut xs: Vec<f64> = [
                (0.0, pair.ell1),
                (pair.ell1, pair.ell3),
                (pair.ell3, length),
            ]
            .iter()
            .filter(|(lo, hi)| hi > lo)
            .flat_map(|(lo, hi)| (0..=n).map(move |i| lo + (hi - lo) * i as f64 / n as f64))
            .collect();
            xs.push(v.scenario().position);
            xs.sort_by(f64::total_cmp);
            xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * length);
            let t1 = v.closure_time();
            let ys = xs
                .iter()
                .map(|x| preclosure_profile(*x, t1, v, cfg, *form))
                .collect::<Result<Vec<_>>>()?;
            SampledCurve::new(xs, ys)
        }
    }
}

/// The three isolated sections at the closure time.
pub fn build_states(
    v: &ValidatedScenario,
    fit: &SectionFit,
    cfg: &SeriesConfig,
) -> Result<[SectionState; 3]> {
    let p = v.params();
    let s = v.scenario();
    let pair = v.pair();
    let medium = p.medium();
    let t1 = s.closure_time;
    // The three-section model needs a bay on each side of the leak bay.
    if pair.ell1 <= 0.0 || pair.ell3 >= p.length {
        return Err(Error::Geometry {
            field: "leak.position",
            reason: format!(
                "leak at {} m lies in an end bay [{}, {}]; the three-section model needs 0 < l1 and l3 < L",
                s.position, pair.ell1, pair.ell3
            ),
        });
    }
    let profile = closure_profile(v, fit, cfg)?;
    Ok([
        SectionState::upstream(
            medium,
            t1,
            pair.ell1,
            profile.clone(),
            FluxModel::constant(p.flux_inlet),
            fit.g_lo,
        )?,
        SectionState::leaking(
            medium,
            t1,
            pair.ell1,
            pair.ell3,
            profile.clone(),
            PointLeak {
                position: s.position,
                flux: s.flux.clone(),
            },
        )?,
        SectionState::downstream(
            medium,
            t1,
            pair.ell3,
            p.length,
            profile,
            FluxModel::constant(p.flux_outlet),
            fit.g_hi,
        )?,
    ])
}

/// Series field of one section on the grid points it contains.
/// `ts` are absolute times.
pub fn section_field(
    state: &SectionState,
    x_grid: &[f64],
    ts: &[f64],
    cfg: &SeriesConfig,
) -> Result<PressureField> {
    let xs: Vec<f64> = x_grid
        .iter()
        .copied()
        .filter(|x| state.contains(*x))
        .collect();
    let mut values = Vec::with_capacity(xs.len() * ts.len());
    for x in &xs {
        for t in ts {
            values.push(section_pressure(state, *x, *t, cfg)?);
        }
    }
    PressureField::new(
        Some(state.id),
        xs,
        ts.to_vec(),
        values,
        FieldSource::Analytic,
    )
}

/// The three section fields on the scenario grids (`t_grid` offsets since closure).
pub fn field_snapshot(
    v: &ValidatedScenario,
    fit: &SectionFit,
    cfg: &SeriesConfig,
) -> Result<[PressureField; 3]> {
    let states = build_states(v, fit, cfg)?;
    let s = v.scenario();
    let ts: Vec<f64> = s.t_grid.iter().map(|dt| s.closure_time + dt).collect();
    let [a, b, c] = &states;
    Ok([
        section_field(a, &s.x_grid, &ts, cfg)?,
        section_field(b, &s.x_grid, &ts, cfg)?,
        section_field(c, &s.x_grid, &ts, cfg)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{validate, SectionId};
    use crate::reference;

    #[test]
    fn reference_snapshot_has_table_shape() {
        let (params, scenario) = reference::scenario();
        let v = validate(params, scenario).unwrap();
        let fields = field_snapshot(&v, &reference::fit(), &SeriesConfig::default()).unwrap();
        for f in &fields {
            assert_eq!(f.xs.len(), 3);
            assert_eq!(f.ts.len(), 11);
        }
        assert_eq!(fields[1].section, Some(SectionId::Leaking));
        assert_eq!(fields[1].xs, vec![10_000.0, 14_500.0, 20_000.0]);
    }

    #[test]
    fn empty_time_grid_gives_empty_fields() {
        let (params, mut scenario) = reference::scenario();
        scenario.t_grid.clear();
        let v = validate(params, scenario).unwrap();
        let fields = field_snapshot(&v, &reference::fit(), &SeriesConfig::default()).unwrap();
        assert!(fields.iter().all(PressureField::is_empty));
    }

    #[test]
    fn single_point_field_equals_the_pointwise_value() {
        let (params, mut scenario) = reference::scenario();
        scenario.x_grid = vec![5_000.0];
        scenario.t_grid = vec![240.0];
        let v = validate(params, scenario).unwrap();
        let cfg = SeriesConfig::default();
        let fit = reference::fit();
        let fields = field_snapshot(&v, &fit, &cfg).unwrap();
        let states = build_states(&v, &fit, &cfg).unwrap();
        assert_eq!(fields[0].values.len(), 1);
        assert_eq!(
            fields[0].values[0],
            section_pressure(&states[0], 5_000.0, 540.0, &cfg).unwrap()
        );
    }

    #[test]
    fn sampled_closure_profile_keeps_the_leak_node() {
        let (params, scenario) = reference::scenario();
        let v = validate(params, scenario).unwrap();
        let fit = SectionFit::default();
        let cfg = SeriesConfig::default();
        let states = build_states(&v, &fit, &cfg).unwrap();
        assert!(states[1].p_init.xs().contains(&14_500.0));
        let direct =
            preclosure_profile(14_500.0, 300.0, &v, &cfg, PreclosureForm::Simplified).unwrap();
        assert_eq!(states[1].p_init.eval(14_500.0), direct);
    }
}
