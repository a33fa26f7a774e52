//! Emergency-mode decisions after the leak bay is isolated.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::{inlet_pressure, section_pressure, InletForm, EULER_C};
use crate::domain::{LineParams, SectionId, SectionState, ValidatedScenario};
use crate::error::{Error, Result};
use crate::SeriesConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationMethod {
    /// Linear headroom law on the simplified inlet pressure.
    Closed,
    /// Bisection on the series inlet pressure.
    Root,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActivationTime {
    pub method: ActivationMethod,
    /// Absolute time since leak onset, s.
    pub t2: f64,
    /// Time since closure, s.
    pub delta: f64,
    /// Pressure limit `ε·P_b`, Pa.
    pub limit: f64,
}

const ROOT_TOL: f64 = 0.1;
const ROOT_SCAN: usize = 200;

fn expect_upstream(state: &SectionState) -> Result<()> {
    if state.id == SectionId::Upstream {
        Ok(())
    } else {
        Err(Error::Domain(
            "activation time needs the upstream section state".into(),
        ))
    }
}

/// Time at which the inlet pressure reaches `ε·P_b` and the connectors must open.
///
/// The closed form inverts the simplified inlet law:
/// `t₂ = t₁ + ℓ₁/(c²G₀(2 − C)) · (εP_b − P(0,t₁) − 2aℓ₁G₀(1/3 − 1/π²))`.
/// The root form bisects the series law on `[t₁, horizon]` to 0.1 s.
pub fn activation_time(
    params: &LineParams,
    state: &SectionState,
    cfg: &SeriesConfig,
    method: ActivationMethod,
    horizon: f64,
) -> Result<ActivationTime> {
    expect_upstream(state)?;
    let limit = params.eps * params.p_inlet;
    let p0 = state.p_init.eval(state.x_lo);
    if p0 >= limit {
        return Err(Error::AlreadyViolated { inlet: p0, limit });
    }
    let t1 = state.t1;
    let delta = match method {
        ActivationMethod::Closed => {
            let ell1 = state.len();
            let g0 = state.flux_lo.value_at(t1);
            let headroom = limit - p0 - params.two_a * ell1 * g0 * (1.0 / 3.0 - 1.0 / (PI * PI));
            let rate = params.c * params.c * g0 * (2.0 - EULER_C) / ell1;
            let delta = headroom / rate;
            if !(delta > 0.0) {
                return Err(Error::AlreadyViolated { inlet: p0, limit });
            }
            delta.max(1.0)
        }
        ActivationMethod::Root => {
            let f = |t: f64| -> Result<f64> {
                Ok(inlet_pressure(state, t, cfg, InletForm::Series)? - limit)
            };
            let mut a = t1;
            let mut fa = f(a)?;
            let width = (horizon - t1) / ROOT_SCAN as f64;
            let mut bracket = None;
            for k in 1..=ROOT_SCAN {
                let b = t1 + k as f64 * width;
                let fb = f(b)?;
                if fb >= 0.0 {
                    bracket = Some((a, b));
                    break;
                }
                a = b;
                fa = fb;
            }
            let Some((mut lo, mut hi)) = bracket else {
                return Err(Error::NoRoot { limit, horizon });
            };
            debug_assert!(fa < 0.0);
            while hi - lo > ROOT_TOL {
                let mid = 0.5 * (lo + hi);
                if f(mid)? >= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            (0.5 * (lo + hi) - t1).max(1.0)
        }
    };
    Ok(ActivationTime {
        method,
        t2: t1 + delta,
        delta,
        limit,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakedMass {
    /// `∫ G_ut dt` over `[t₁, horizon]`, Pa·s (kg/m² of flow section).
    pub flux_integral: f64,
    /// Same quantity from the fall of the section's linepack, Pa·s.
    pub linepack: f64,
    /// `flux_integral` times the flow area, when the diameter is known.
    pub kg: Option<f64>,
}

/// Linepack mass `span/c² · (mean P at start − mean P at end)` between two
/// sampled profiles on the same nodes, trapezoid rule.
pub fn linepack_loss(xs: &[f64], start: &[f64], end: &[f64], c: f64) -> f64 {
    let mut integral = 0.0;
    for i in 1..xs.len() {
        let h = xs[i] - xs[i - 1];
        let d0 = start[i - 1] - end[i - 1];
        let d1 = start[i] - end[i];
        integral += 0.5 * h * (d0 + d1);
    }
    integral / (c * c)
}

const MEAN_INTERVALS: usize = 2_000;

/// Gas lost from the sealed section between closure and `horizon`.
pub fn leaked_mass(
    state: &SectionState,
    horizon: f64,
    cfg: &SeriesConfig,
    area: Option<f64>,
) -> Result<LeakedMass> {
    if state.id != SectionId::Leaking {
        return Err(Error::Domain(
            "leaked mass needs the leaking section state".into(),
        ));
    }
    let flux_integral = state
        .leak
        .as_ref()
        .map_or(0.0, |l| l.flux.integral(state.t1, horizon));
    let mut xs: Vec<f64> = (0..=MEAN_INTERVALS)
        .map(|i| state.x_lo + state.len() * i as f64 / MEAN_INTERVALS as f64)
        .collect();
    if let Some(l) = &state.leak {
        xs.push(l.position);
        xs.sort_by(f64::total_cmp);
        xs.dedup();
    }
    let sample = |t: f64| -> Result<Vec<f64>> {
        xs.iter()
            .map(|x| section_pressure(state, *x, t, cfg))
            .collect()
    };
    let start = sample(state.t1)?;
    let end = sample(horizon.max(state.t1))?;
    let linepack = linepack_loss(&xs, &start, &end, state.medium.c);
    Ok(LeakedMass {
        flux_integral,
        linepack,
        kg: area.map(|a| a * flux_integral),
    })
}

/// Relative shortfall `1 − P₃(L, t)/P_s` of delivery pressure.
pub fn supply_deficit(
    params: &LineParams,
    state: &SectionState,
    t: f64,
    cfg: &SeriesConfig,
) -> Result<f64> {
    if state.id != SectionId::Downstream {
        return Err(Error::Domain(
            "supply deficit needs the downstream section state".into(),
        ));
    }
    let p = section_pressure(state, state.x_hi, t, cfg)?;
    Ok(1.0 - p / params.p_outlet)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValveAction {
    Open,
    Close,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventReason {
    IsolateLeak,
    ProtectCompressor,
    RestoreSupply,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValveEvent {
    pub time: f64,
    pub valve: String,
    pub position: f64,
    pub action: ValveAction,
    pub reason: EventReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValveTimeline {
    pub events: Vec<ValveEvent>,
}

impl ValveTimeline {
    pub fn is_ordered(&self) -> bool {
        self.events.windows(2).all(|w| w[0].time <= w[1].time)
    }
}

/// Close the isolation valves (4.2 upstream, 4.1 downstream of the leak) at
/// `t₁`, then open the connector valves (5) at both ends of the bay at `t₂`.
pub fn build_timeline(scenario: &ValidatedScenario, activation: &ActivationTime) -> ValveTimeline {
    let t1 = scenario.closure_time();
    let pair = scenario.pair();
    let event = |time, valve: &str, position, action, reason| ValveEvent {
        time,
        valve: valve.to_string(),
        position,
        action,
        reason,
    };
    ValveTimeline {
        events: vec![
            event(
                t1,
                "4.2",
                pair.ell1,
                ValveAction::Close,
                EventReason::IsolateLeak,
            ),
            event(
                t1,
                "4.1",
                pair.ell3,
                ValveAction::Close,
                EventReason::IsolateLeak,
            ),
            event(
                activation.t2,
                "5",
                pair.ell1,
                ValveAction::Open,
                EventReason::ProtectCompressor,
            ),
            event(
                activation.t2,
                "5",
                pair.ell3,
                ValveAction::Open,
                EventReason::RestoreSupply,
            ),
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchReport {
    pub t1: f64,
    pub t2: f64,
    pub t2_since_closure: f64,
    pub t2_method: ActivationMethod,
    pub t2_root: Option<f64>,
    pub leaked_mass_integral: f64,
    pub leaked_mass_linepack: f64,
    pub leaked_mass_kg: Option<f64>,
    pub supply_deficit: f64,
    pub supply_deficit_time: f64,
    pub epsilon_used: f64,
    pub euler_constant: f64,
}

/// Everything the operator needs from one scenario. The supply deficit is
/// taken at the last output time.
pub fn dispatch_report(
    scenario: &ValidatedScenario,
    states: &[SectionState; 3],
    cfg: &SeriesConfig,
) -> Result<(DispatchReport, ValveTimeline)> {
    let p = scenario.params();
    let s = scenario.scenario();
    let closed = activation_time(p, &states[0], cfg, ActivationMethod::Closed, s.horizon)?;
    let root = activation_time(p, &states[0], cfg, ActivationMethod::Root, s.horizon)
        .ok()
        .map(|a| a.t2);
    let mass = leaked_mass(&states[1], s.horizon, cfg, p.meta.area())?;
    let t_deficit = s.closure_time + s.t_grid.last().copied().unwrap_or(0.0);
    let deficit = supply_deficit(p, &states[2], t_deficit, cfg)?;
    let report = DispatchReport {
        t1: s.closure_time,
        t2: closed.t2,
        t2_since_closure: closed.delta,
        t2_method: closed.method,
        t2_root: root,
        leaked_mass_integral: mass.flux_integral,
        leaked_mass_linepack: mass.linepack,
        leaked_mass_kg: mass.kg,
        supply_deficit: deficit,
        supply_deficit_time: t_deficit,
        epsilon_used: p.eps,
        euler_constant: EULER_C,
    };
    Ok((report, build_timeline(scenario, &closed)))
}
