use serde::{Deserialize, Serialize};

use crate::domain::{
    FieldSource, FluxModel, Medium, PointLeak, PressureField, SectionState, ValidatedScenario,
};
use crate::error::{positive, Error, Result};
use crate::oracle::tridiag::Thomas;

/// What the scheme evolves.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    /// Hold the closure profile and evolve the increment driven by the
    /// boundary fluxes and the leak, as the series do.
    #[default]
    Increment,
    /// Evolve the closure profile itself under the same fluxes.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdConfig {
    pub dx: f64,
    pub dt: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// End time since leak onset, s.
    pub horizon: f64,
    #[serde(default)]
    pub formulation: Formulation,
}

fn default_theta() -> f64 {
    0.5
}

impl FdConfig {
    pub fn new(dx: f64, dt: f64, horizon: f64) -> Self {
        FdConfig {
            dx,
            dt,
            theta: default_theta(),
            horizon,
            formulation: Formulation::Increment,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("fd.dx", self.dx)?;
        positive("fd.dt", self.dt)?;
        positive("fd.horizon", self.horizon)?;
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::Domain(format!(
                "`fd.theta` must lie in [0, 1] (got {})",
                self.theta
            )));
        }
        Ok(())
    }
}

/// One interval with flux ends and an optional point sink.
struct Problem<'a> {
    lo: f64,
    hi: f64,
    t0: f64,
    medium: Medium,
    initial: Box<dyn Fn(f64) -> f64 + 'a>,
    flux_lo: &'a FluxModel,
    extra_lo: f64,
    flux_hi: &'a FluxModel,
    extra_hi: f64,
    leak: Option<&'a PointLeak>,
    formulation: Formulation,
}

fn node_count(span: f64, dx: f64, what: &str) -> Result<usize> {
    let ratio = span / dx;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Grid(format!(
            "{what} {span} m is not a whole number of dx = {dx} m cells"
        )));
    }
    Ok(n as usize)
}

fn solve(p: &Problem<'_>, cfg: &FdConfig) -> Result<PressureField> {
    cfg.validate()?;
    let dx = cfg.dx;
    let theta = cfg.theta;
    let n = node_count(p.hi - p.lo, dx, "section length")?;
    let leak_node = match p.leak {
        Some(l) => Some(node_count(l.position - p.lo, dx, "leak offset")?),
        None => None,
    };
    let span_t = cfg.horizon - p.t0;
    if !(span_t > 0.0) {
        return Err(Error::Grid(format!(
            "horizon {} s does not extend past the start {} s",
            cfg.horizon, p.t0
        )));
    }
    let diff = p.medium.diffusivity();
    if theta < 0.5 {
        let limit = dx * dx / (2.0 * diff * (1.0 - 2.0 * theta));
        if cfg.dt > limit {
            return Err(Error::Stability {
                dt: cfg.dt,
                limit,
                theta,
            });
        }
    }
    // Shorten the step so a whole number of steps lands on the horizon.
    let steps = ((span_t / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    let dt = span_t / steps as f64;

    let c2 = p.medium.c2();
    let r = diff * dt / (dx * dx);
    let m = n + 1;
    let mut lower = vec![-theta * r; m];
    let diag = vec![1.0 + 2.0 * theta * r; m];
    let mut upper = vec![-theta * r; m];
    upper[0] = -2.0 * theta * r;
    lower[n] = -2.0 * theta * r;
    let solver = Thomas::new(&lower, &diag, &upper)?;

    let source = |t: f64, out: &mut [f64]| {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[0] += 2.0 * c2 * (p.flux_lo.value_at(t) + p.extra_lo) / dx;
        out[n] -= 2.0 * c2 * (p.flux_hi.value_at(t) + p.extra_hi) / dx;
        if let (Some(k), Some(l)) = (leak_node, p.leak) {
            let weight = if k == n { 2.0 } else { 1.0 };
            out[k] -= weight * c2 * l.flux.value_at(t) / dx;
        }
    };

    let xs: Vec<f64> = (0..m).map(|i| p.lo + i as f64 * dx).collect();
    let held: Vec<f64> = xs.iter().map(|x| (p.initial)(*x)).collect();
    let mut u = match p.formulation {
        Formulation::Increment => vec![0.0; m],
        Formulation::Full => held.clone(),
    };
    let offset = |u: &[f64]| -> Vec<f64> {
        match p.formulation {
            Formulation::Increment => u.iter().zip(&held).map(|(a, b)| a + b).collect(),
            Formulation::Full => u.to_vec(),
        }
    };

    let ts: Vec<f64> = (0..=steps).map(|k| p.t0 + k as f64 * dt).collect();
    let mut frames = Vec::with_capacity(steps + 1);
    frames.push(offset(&u));
    let mut s_old = vec![0.0; m];
    let mut s_new = vec![0.0; m];
    let mut rhs = vec![0.0; m];
    source(ts[0], &mut s_old);
    let explicit = (1.0 - theta) * r;
    for k in 1..=steps {
        source(ts[k], &mut s_new);
        for i in 0..m {
            let lap = match i {
                0 => 2.0 * (u[1] - u[0]),
                _ if i == n => 2.0 * (u[n - 1] - u[n]),
                _ => u[i - 1] - 2.0 * u[i] + u[i + 1],
            };
            rhs[i] = u[i] + explicit * lap + dt * (theta * s_new[i] + (1.0 - theta) * s_old[i]);
        }
        solver.solve_in_place(&mut rhs);
        std::mem::swap(&mut u, &mut rhs);
        std::mem::swap(&mut s_old, &mut s_new);
        frames.push(offset(&u));
    }

    let nt = ts.len();
    let mut values = vec![0.0; m * nt];
    for (it, frame) in frames.iter().enumerate() {
        for (ix, v) in frame.iter().enumerate() {
            values[ix * nt + it] = *v;
        }
    }
    PressureField::new(None, xs, ts, values, FieldSource::Fd)
}

/// θ-scheme solve of one isolated section from `t₁` to `cfg.horizon`.
///
/// Every time step is recorded. The leak must sit on a grid node.
pub fn fd_solve(state: &SectionState, cfg: &FdConfig) -> Result<PressureField> {
    let problem = Problem {
        lo: state.x_lo,
        hi: state.x_hi,
        t0: state.t1,
        medium: state.medium,
        initial: Box::new(|x| state.p_init.eval(x)),
        flux_lo: &state.flux_lo,
        extra_lo: state.g_lo / state.medium.two_a,
        flux_hi: &state.flux_hi,
        extra_hi: state.g_hi / state.medium.two_a,
        leak: state.leak.as_ref(),
        formulation: cfg.formulation,
    };
    let mut field = solve(&problem, cfg)?;
    field.section = Some(state.id);
    Ok(field)
}

/// θ-scheme solve of the connected line from leak onset to `cfg.horizon`,
/// starting from the stationary through-flow profile. Always evolves the
/// full pressure, since that profile carries the through-flow itself.
pub fn fd_solve_line(scenario: &ValidatedScenario, cfg: &FdConfig) -> Result<PressureField> {
    let p = scenario.params();
    let leak = PointLeak {
        position: scenario.scenario().position,
        flux: scenario.scenario().flux.clone(),
    };
    let inlet = FluxModel::constant(p.flux_inlet);
    let outlet = FluxModel::constant(p.flux_outlet);
    let (pb, slope) = (p.p_inlet, p.two_a * p.flux_inlet);
    let problem = Problem {
        lo: 0.0,
        hi: p.length,
        t0: 0.0,
        medium: p.medium(),
        initial: Box::new(move |x| pb - slope * x),
        flux_lo: &inlet,
        extra_lo: 0.0,
        flux_hi: &outlet,
        extra_hi: 0.0,
        leak: Some(&leak),
        formulation: Formulation::Full,
    };
    solve(&problem, cfg)
}
