//! Finite-difference reference solver.
//!
//! The scheme is the θ-weighted two-level discretisation of
//! `P_t = (c²/2a)·P_xx + c²·sources` on a uniform node grid. Flux ends use a
//! ghost node, so with trapezoid weights the discrete linepack changes by
//! exactly the θ-weighted net flux each step; [`mass_balance_residual`]
//! measures how far a field is from that identity.

mod fd;
mod tridiag;

use serde::{Deserialize, Serialize};

use crate::domain::{PressureField, SectionState};
use crate::error::{Error, Result};

pub use fd::{fd_solve, fd_solve_line, FdConfig, Formulation};
pub use tridiag::Thomas;

/// Trapezoid-rule linepack `(1/c²)·∫P dx` of every stored time level.
pub fn linepack_series(field: &PressureField, c: f64) -> Result<Vec<f64>> {
    let nx = field.xs.len();
    if nx < 2 {
        return Err(Error::Grid("linepack needs at least two nodes".into()));
    }
    let weights: Vec<f64> = (0..nx)
        .map(|i| {
            let left = if i > 0 {
                field.xs[i] - field.xs[i - 1]
            } else {
                0.0
            };
            let right = if i + 1 < nx {
                field.xs[i + 1] - field.xs[i]
            } else {
                0.0
            };
            0.5 * (left + right)
        })
        .collect();
    let c2 = c * c;
    Ok((0..field.ts.len())
        .map(|it| {
            (0..nx)
                .map(|ix| weights[ix] * field.get(ix, it))
                .sum::<f64>()
                / c2
        })
        .collect())
}

/// Largest cumulative linepack imbalance over the run, relative to the
/// initial linepack. `net_flux(t)` is inflow minus outflow minus leak.
pub fn mass_balance_residual_with(
    field: &PressureField,
    c: f64,
    theta: f64,
    net_flux: impl Fn(f64) -> f64,
) -> Result<f64> {
    let lp = linepack_series(field, c)?;
    let lp0 = lp[0];
    let mut supplied = 0.0;
    let mut worst: f64 = 0.0;
    for k in 1..field.ts.len() {
        let (a, b) = (field.ts[k - 1], field.ts[k]);
        supplied += (b - a) * (theta * net_flux(b) + (1.0 - theta) * net_flux(a));
        worst = worst.max((lp[k] - lp0 - supplied).abs());
    }
    Ok(worst / lp0.abs())
}

/// Mass-balance residual of a field produced by [`fd_solve`] for `state`.
pub fn mass_balance_residual(
    field: &PressureField,
    state: &SectionState,
    theta: f64,
) -> Result<f64> {
    mass_balance_residual_with(field, state.medium.c, theta, |t| {
        state.effective_flux_lo(t) - state.effective_flux_hi(t) - state.leak_flux(t)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// Observed order from the three finest grids.
    pub order: f64,
    pub dx: Vec<f64>,
    /// Max-norm difference between successive grids on the coarse nodes.
    pub differences: Vec<f64>,
}

/// Spatial order from `refinements` successive halvings of `cfg.dx` at fixed
/// `dt`, compared at the final time on the coarsest nodes.
pub fn convergence_order(
    state: &SectionState,
    cfg: &FdConfig,
    refinements: usize,
) -> Result<ConvergenceReport> {
    if refinements < 3 {
        return Err(Error::InsufficientData(format!(
            "an order estimate needs at least 3 grids (got {refinements})"
        )));
    }
    let mut finals = Vec::with_capacity(refinements);
    let mut dxs = Vec::with_capacity(refinements);
    for k in 0..refinements {
        let dx = cfg.dx / (1u64 << k) as f64;
        let run = FdConfig { dx, ..cfg.clone() };
        let field = fd_solve(state, &run)?;
        let last = field.ts.len() - 1;
        let stride = 1usize << k;
        let coarse: Vec<f64> = (0..field.xs.len())
            .step_by(stride)
            .map(|ix| field.get(ix, last))
            .collect();
        finals.push(coarse);
        dxs.push(dx);
    }
    let differences: Vec<f64> = finals
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let (e1, e2) = (
        differences[differences.len() - 2],
        differences[differences.len() - 1],
    );
    if !(e1 > 0.0 && e2 > 0.0) {
        return Err(Error::InsufficientData(
            "successive grids agree exactly; no order can be observed".into(),
        ));
    }
    Ok(ConvergenceReport {
        order: (e1 / e2).log2(),
        dx: dxs,
        differences,
    })
}
