//! Typed parameter model for the linearised line.
//!
//! Everything is SI internally: metres, seconds, pascals, and mass fluxes in
//! Pa·s/m (equivalently kg·m⁻²·s⁻¹). Kilometre and 10⁻² MPa views exist only at
//! the I/O boundary, through [`km_to_m`] and friends.

use serde::{Deserialize, Serialize};

use crate::error::{non_negative, positive, Error, Result};
use crate::placement::{self, TieBreak, ValvePair};

pub const M_PER_KM: f64 = 1000.0;
/// One table unit, 10⁻² MPa, in pascals.
pub const PA_PER_TABLE_UNIT: f64 = 1.0e4;

pub fn km_to_m(km: f64) -> f64 {
    km * M_PER_KM
}

pub fn m_to_km(m: f64) -> f64 {
    m / M_PER_KM
}

pub fn pa_to_table_unit(pa: f64) -> f64 {
    pa / PA_PER_TABLE_UNIT
}

pub fn table_unit_to_pa(v: f64) -> f64 {
    v * PA_PER_TABLE_UNIT
}

/// Descriptive fields of the line. The linearised model ignores them; the
/// diameter is used only to turn a per-area leak mass into kilograms.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diameter: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_avg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_avg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_hyd: Option<f64>,
}

impl LineMeta {
    /// Flow cross-section in m², when a diameter is known.
    pub fn area(&self) -> Option<f64> {
        self.diameter.map(|d| std::f64::consts::PI * d * d / 4.0)
    }
}

/// Physical and geometric constants of the damaged line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineParams {
    /// Isothermal speed of sound, m/s.
    pub c: f64,
    /// Linearised dissipation coefficient 2a, 1/s.
    pub two_a: f64,
    /// Line length, m.
    pub length: f64,
    /// Connector spacing, m.
    pub step: f64,
    /// Nominal inlet (compressor discharge) pressure, Pa.
    pub p_inlet: f64,
    /// Nominal delivery pressure, Pa.
    pub p_outlet: f64,
    /// Inlet mass flux, Pa·s/m.
    pub flux_inlet: f64,
    /// Outlet offtake flux, Pa·s/m.
    pub flux_outlet: f64,
    /// Compressor pressure-ratio limit.
    pub eps: f64,
    #[serde(default)]
    pub meta: LineMeta,
}

impl LineParams {
    pub fn medium(&self) -> Medium {
        Medium {
            c: self.c,
            two_a: self.two_a,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("line.c", self.c)?;
        positive("line.two_a", self.two_a)?;
        positive("line.length", self.length)?;
        positive("line.step", self.step)?;
        positive("line.p_inlet", self.p_inlet)?;
        positive("line.p_outlet", self.p_outlet)?;
        non_negative("line.flux_inlet", self.flux_inlet)?;
        non_negative("line.flux_outlet", self.flux_outlet)?;
        if self.step > self.length {
            return Err(Error::Geometry {
                field: "line.step",
                reason: format!(
                    "connector spacing {} m exceeds line length {} m",
                    self.step, self.length
                ),
            });
        }
        if self.p_outlet >= self.p_inlet {
            return Err(Error::Geometry {
                field: "line.p_outlet",
                reason: format!(
                    "outlet pressure {} Pa must be below inlet pressure {} Pa",
                    self.p_outlet, self.p_inlet
                ),
            });
        }
        if !(self.eps.is_finite() && self.eps > 1.0) {
            return Err(Error::Threshold {
                field: "line.eps",
                value: self.eps,
            });
        }
        Ok(())
    }
}

/// The two constants of the parabolic model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub c: f64,
    pub two_a: f64,
}

impl Medium {
    pub fn c2(&self) -> f64 {
        self.c * self.c
    }

    /// c²/2a, m²/s.
    pub fn diffusivity(&self) -> f64 {
        self.c2() / self.two_a
    }
}

/// Time history of a mass flux (Pa·s/m). Piecewise-linear histories are
/// held constant outside their sample range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FluxModel {
    Constant { value: f64 },
    PiecewiseLinear { times: Vec<f64>, values: Vec<f64> },
}

pub type LeakFluxModel = FluxModel;

impl FluxModel {
    pub fn constant(value: f64) -> Self {
        FluxModel::Constant { value }
    }

    pub fn zero() -> Self {
        FluxModel::constant(0.0)
    }

    pub fn piecewise(times: Vec<f64>, values: Vec<f64>) -> Self {
        FluxModel::PiecewiseLinear { times, values }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            FluxModel::Constant { value } => Some(*value),
            FluxModel::PiecewiseLinear { .. } => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FluxModel::Constant { value } => *value == 0.0,
            FluxModel::PiecewiseLinear { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }

    pub fn validate(&self, field: &'static str) -> Result<()> {
        match self {
            FluxModel::Constant { value } => non_negative(field, *value),
            FluxModel::PiecewiseLinear { times, values } => {
                if times.is_empty() || times.len() != values.len() {
                    return Err(Error::Domain(format!(
                        "`{field}`: need matching, non-empty times and values"
                    )));
                }
                if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::Domain(format!(
                        "`{field}`: sample times must be strictly increasing"
                    )));
                }
                values.iter().try_for_each(|v| non_negative(field, *v))
            }
        }
    }

    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            FluxModel::Constant { value } => *value,
            FluxModel::PiecewiseLinear { times, values } => {
                let last = times.len() - 1;
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[last] {
                    return values[last];
                }
                let k = times.partition_point(|s| *s <= t) - 1;
                let w = (t - times[k]) / (times[k + 1] - times[k]);
                values[k] + w * (values[k + 1] - values[k])
            }
        }
    }

    /// Slope changes strictly inside `(a, b)`.
    pub fn knots_in(&self, a: f64, b: f64) -> Vec<f64> {
        match self {
            FluxModel::Constant { .. } => Vec::new(),
            FluxModel::PiecewiseLinear { times, .. } => {
                times.iter().copied().filter(|s| *s > a && *s < b).collect()
            }
        }
    }

    /// Exact ∫ₐᵇ G dt.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self {
            FluxModel::Constant { value } => value * (b - a),
            FluxModel::PiecewiseLinear { .. } => {
                let mut nodes = vec![a];
                nodes.extend(self.knots_in(a, b));
                nodes.push(b);
                nodes
                    .windows(2)
                    .map(|w| 0.5 * (self.value_at(w[0]) + self.value_at(w[1])) * (w[1] - w[0]))
                    .sum()
            }
        }
    }
}

/// Leak event and output grids.
///
/// `t_grid` holds offsets since valve closure (seconds after `closure_time`),
/// which is how the section tables are laid out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakScenario {
    /// Leak position ℓ₂, m.
    pub position: f64,
    /// Isolation-valve closure time t₁ since leak onset, s.
    pub closure_time: f64,
    pub flux: LeakFluxModel,
    /// Total simulated time since leak onset, s.
    pub horizon: f64,
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub tie_break: TieBreak,
}

/// A parameter set and scenario whose invariants have all been checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedScenario {
    params: LineParams,
    scenario: LeakScenario,
    pair: ValvePair,
}

impl ValidatedScenario {
    pub fn params(&self) -> &LineParams {
        &self.params
    }

    pub fn scenario(&self) -> &LeakScenario {
        &self.scenario
    }

    pub fn pair(&self) -> &ValvePair {
        &self.pair
    }

    pub fn closure_time(&self) -> f64 {
        self.scenario.closure_time
    }

    pub fn into_parts(self) -> (LineParams, LeakScenario) {
        (self.params, self.scenario)
    }
}

fn strictly_increasing(field: &'static str, grid: &[f64], lo: f64, hi: f64) -> Result<()> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Geometry {
            field,
            reason: "grid must be strictly increasing".into(),
        });
    }
    if let Some(bad) = grid
        .iter()
        .find(|v| !(v.is_finite() && **v >= lo && **v <= hi))
    {
        return Err(Error::Geometry {
            field,
            reason: format!("value {bad} outside [{lo}, {hi}]"),
        });
    }
    Ok(())
}

pub fn validate(params: LineParams, scenario: LeakScenario) -> Result<ValidatedScenario> {
    params.validate()?;
    positive("leak.closure_time", scenario.closure_time)?;
    positive("leak.horizon", scenario.horizon)?;
    if !(scenario.position > 0.0 && scenario.position < params.length) {
        return Err(Error::Geometry {
            field: "leak.position",
            reason: format!(
                "leak at {} m lies outside the line (0, {})",
                scenario.position, params.length
            ),
        });
    }
    if scenario.horizon <= scenario.closure_time {
        return Err(Error::Geometry {
            field: "leak.horizon",
            reason: "horizon must extend past the closure time".into(),
        });
    }
    scenario.flux.validate("leak.flux")?;
    strictly_increasing("outputs.x_grid", &scenario.x_grid, 0.0, params.length)?;
    strictly_increasing(
        "outputs.t_grid",
        &scenario.t_grid,
        0.0,
        scenario.horizon - scenario.closure_time,
    )?;
    let pair = placement::locate_isolation_valves_with(
        scenario.position,
        params.step,
        params.length,
        scenario.tie_break,
    )?;
    Ok(ValidatedScenario {
        params,
        scenario,
        pair,
    })
}

/// Which isolated section a state or field belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SectionId {
    /// `[0, ℓ₁]`, filling from the compressor station.
    Upstream,
    /// `[ℓ₁, ℓ₃]`, sealed and venting through the leak.
    Leaking,
    /// `[ℓ₃, L]`, depleting towards the consumers.
    Downstream,
}

impl SectionId {
    pub const ALL: [SectionId; 3] = [
        SectionId::Upstream,
        SectionId::Leaking,
        SectionId::Downstream,
    ];

    pub fn number(self) -> u8 {
        match self {
            SectionId::Upstream => 1,
            SectionId::Leaking => 2,
            SectionId::Downstream => 3,
        }
    }
}

/// Piecewise-linear curve through `(xs[i], ys[i])`, clamped at the ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCurve {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl SampledCurve {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::Domain(
                "sampled curve needs matching, non-empty abscissae and ordinates".into(),
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) || xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::Domain(
                "sampled curve abscissae must be finite and strictly increasing".into(),
            ));
        }
        Ok(SampledCurve { xs, ys })
    }

    pub fn from_fn(lo: f64, hi: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let n = intervals.max(1);
        let xs: Vec<f64> = (0..=n)
            .map(|i| lo + (hi - lo) * i as f64 / n as f64)
            .collect();
        let ys = xs.iter().map(|x| f(*x)).collect();
        SampledCurve::new(xs, ys)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn first_x(&self) -> f64 {
        self.xs[0]
    }

    pub fn last_x(&self) -> f64 {
        self.xs[self.xs.len() - 1]
    }

    pub fn eval(&self, x: f64) -> f64 {
        let last = self.xs.len() - 1;
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[last] {
            return self.ys[last];
        }
        let k = self.xs.partition_point(|s| *s <= x) - 1;
        let w = (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]);
        self.ys[k] + w * (self.ys[k + 1] - self.ys[k])
    }
}

/// A leak: Dirac sink of strength `flux` at `position`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointLeak {
    pub position: f64,
    pub flux: LeakFluxModel,
}

/// One isolated section at the closure time.
///
/// Boundary fluxes follow the flow direction: `flux_lo` enters at `x_lo`,
/// `flux_hi` leaves at `x_hi`, so ∂P/∂x = −2a·G at either end. The gradient
/// terms `g_lo`/`g_hi` are the dP/dx corrections carried by the section laws;
/// they add `g/2a` to the corresponding boundary flux.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionState {
    pub id: SectionId,
    pub x_lo: f64,
    pub x_hi: f64,
    /// Closure time t₁ since leak onset, s.
    pub t1: f64,
    pub medium: Medium,
    /// Pressure profile at t₁.
    pub p_init: SampledCurve,
    pub flux_lo: FluxModel,
    pub flux_hi: FluxModel,
    pub g_lo: f64,
    pub g_hi: f64,
    pub leak: Option<PointLeak>,
}

const EDGE_TOL: f64 = 1e-9;

impl SectionState {
    pub fn upstream(
        medium: Medium,
        t1: f64,
        ell1: f64,
        p_init: SampledCurve,
        flux_in: FluxModel,
        g_lo: f64,
    ) -> Result<Self> {
        SectionState {
            id: SectionId::Upstream,
            x_lo: 0.0,
            x_hi: ell1,
            t1,
            medium,
            p_init,
            flux_lo: flux_in,
            flux_hi: FluxModel::zero(),
            g_lo,
            g_hi: 0.0,
            leak: None,
        }
        .validated()
    }

    pub fn leaking(
        medium: Medium,
        t1: f64,
        ell1: f64,
        ell3: f64,
        p_init: SampledCurve,
        leak: PointLeak,
    ) -> Result<Self> {
        SectionState {
            id: SectionId::Leaking,
            x_lo: ell1,
            x_hi: ell3,
            t1,
            medium,
            p_init,
            flux_lo: FluxModel::zero(),
            flux_hi: FluxModel::zero(),
            g_lo: 0.0,
            g_hi: 0.0,
            leak: Some(leak),
        }
        .validated()
    }

    pub fn downstream(
        medium: Medium,
        t1: f64,
        ell3: f64,
        length: f64,
        p_init: SampledCurve,
        flux_out: FluxModel,
        g_hi: f64,
    ) -> Result<Self> {
        SectionState {
            id: SectionId::Downstream,
            x_lo: ell3,
            x_hi: length,
            t1,
            medium,
            p_init,
            flux_lo: FluxModel::zero(),
            flux_hi: flux_out,
            g_lo: 0.0,
            g_hi,
            leak: None,
        }
        .validated()
    }

    /// Checks the invariants of a hand-assembled state.
    pub fn validated(self) -> Result<Self> {
        positive("section.medium.c", self.medium.c)?;
        positive("section.medium.two_a", self.medium.two_a)?;
        positive("section.t1", self.t1)?;
        if !(self.x_lo < self.x_hi) || !self.x_lo.is_finite() || !self.x_hi.is_finite() {
            return Err(Error::Geometry {
                field: "section.x_lo",
                reason: format!("empty section [{}, {}]", self.x_lo, self.x_hi),
            });
        }
        let tol = EDGE_TOL * (self.x_hi - self.x_lo);
        if self.p_init.first_x() > self.x_lo + tol || self.p_init.last_x() < self.x_hi - tol {
            return Err(Error::Geometry {
                field: "section.p_init",
                reason: format!(
                    "initial profile covers [{}, {}], section needs [{}, {}]",
                    self.p_init.first_x(),
                    self.p_init.last_x(),
                    self.x_lo,
                    self.x_hi
                ),
            });
        }
        self.flux_lo.validate("section.flux_lo")?;
        self.flux_hi.validate("section.flux_hi")?;
        if !self.g_lo.is_finite() || !self.g_hi.is_finite() {
            return Err(Error::Domain(
                "boundary gradient terms must be finite".into(),
            ));
        }
        if let Some(leak) = &self.leak {
            leak.flux.validate("section.leak.flux")?;
            if !(leak.position > self.x_lo && leak.position <= self.x_hi) {
                return Err(Error::Geometry {
                    field: "section.leak.position",
                    reason: format!(
                        "leak at {} m outside section ({}, {})",
                        leak.position, self.x_lo, self.x_hi
                    ),
                });
            }
        }
        let sealed = |f: &FluxModel, g: f64| f.is_zero() && g == 0.0;
        let ok = match self.id {
            SectionId::Upstream => sealed(&self.flux_hi, self.g_hi) && self.leak.is_none(),
            SectionId::Leaking => {
                sealed(&self.flux_lo, self.g_lo) && sealed(&self.flux_hi, self.g_hi)
            }
            SectionId::Downstream => sealed(&self.flux_lo, self.g_lo) && self.leak.is_none(),
        };
        if !ok {
            return Err(Error::Domain(format!(
                "section {} boundary layout violates its closed-end convention",
                self.id.number()
            )));
        }
        Ok(self)
    }

    pub fn len(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn contains(&self, x: f64) -> bool {
        let tol = EDGE_TOL * self.len();
        x >= self.x_lo - tol && x <= self.x_hi + tol
    }

    /// Total flux entering at `x_lo` at time `t`, gradient term included.
    pub fn effective_flux_lo(&self, t: f64) -> f64 {
        self.flux_lo.value_at(t) + self.g_lo / self.medium.two_a
    }

    /// Total flux leaving at `x_hi` at time `t`, gradient term included.
    pub fn effective_flux_hi(&self, t: f64) -> f64 {
        self.flux_hi.value_at(t) + self.g_hi / self.medium.two_a
    }

    pub fn leak_flux(&self, t: f64) -> f64 {
        self.leak.as_ref().map_or(0.0, |l| l.flux.value_at(t))
    }
}

/// Which solver produced a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldSource {
    Analytic,
    Fd,
}

/// Pressures sampled on an `(x, t)` grid, stored x-major (time varies fastest).
/// `ts` are absolute times since leak onset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureField {
    pub section: Option<SectionId>,
    pub xs: Vec<f64>,
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
    pub source: FieldSource,
}

impl PressureField {
    pub fn new(
        section: Option<SectionId>,
        xs: Vec<f64>,
        ts: Vec<f64>,
        values: Vec<f64>,
        source: FieldSource,
    ) -> Result<Self> {
        if values.len() != xs.len() * ts.len() {
            return Err(Error::Grid(format!(
                "field has {} values for a {}x{} grid",
                values.len(),
                xs.len(),
                ts.len()
            )));
        }
        Ok(PressureField {
            section,
            xs,
            ts,
            values,
            source,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, ix: usize, it: usize) -> f64 {
        self.values[ix * self.ts.len() + it]
    }

    /// Pressure profile at time index `it`.
    pub fn profile(&self, it: usize) -> Vec<f64> {
        (0..self.xs.len()).map(|ix| self.get(ix, it)).collect()
    }

    /// Bilinear interpolation inside the grid.
    pub fn interpolate(&self, x: f64, t: f64) -> Result<f64> {
        let (ix, wx) = bracket(&self.xs, x)
            .ok_or_else(|| Error::Grid(format!("x = {x} outside the field")))?;
        let (it, wt) = bracket(&self.ts, t)
            .ok_or_else(|| Error::Grid(format!("t = {t} outside the field")))?;
        let at = |i: usize, j: usize| self.get(i, j);
        let ix1 = (ix + 1).min(self.xs.len() - 1);
        let it1 = (it + 1).min(self.ts.len() - 1);
        let lo = at(ix, it) * (1.0 - wt) + at(ix, it1) * wt;
        let hi = at(ix1, it) * (1.0 - wt) + at(ix1, it1) * wt;
        Ok(lo * (1.0 - wx) + hi * wx)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn bracket(grid: &[f64], v: f64) -> Option<(usize, f64)> {
    let n = grid.len();
    if n == 0 {
        return None;
    }
    let span = (grid[n - 1] - grid[0]).abs().max(1.0);
    let tol = 1e-9 * span;
    if v < grid[0] - tol || v > grid[n - 1] + tol {
        return None;
    }
    if n == 1 {
        return Some((0, 0.0));
    }
    let k = grid.partition_point(|g| *g <= v).clamp(1, n - 1) - 1;
    let w = ((v - grid[k]) / (grid[k + 1] - grid[k])).clamp(0.0, 1.0);
    Some((k, w))
}

/// Truncation control for the modal series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesConfig {
    pub n_max: usize,
    /// Tail tolerance relative to the local pressure.
    pub tail_tol: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            n_max: 500,
            tail_tol: 1e-10,
        }
    }
}

impl SeriesConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < 1 {
            return Err(Error::Domain("`series.n_max` must be at least 1".into()));
        }
        positive("series.tail_tol", self.tail_tol)
    }
}
