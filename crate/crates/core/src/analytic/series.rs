//! Modal response of a sealed interval to a point flux.
//!
//! For `P_t = D·P_xx + c²·q(t)·δ(x − ξ)` on `[lo, lo + ℓ]` with zero-gradient
//! ends and zero initial value, the cosine expansion gives
//!
//! ```text
//! R(x, t) = (c²/ℓ)·[ Q(t) + 2·Σₙ cos(nπX)·cos(nπΞ)·Iₙ(t) ]
//! Iₙ(t)   = ∫ q(s)·exp(−αₙ(t − s)) ds,   αₙ = α·n²,  α = π²D/ℓ²
//! ```
//!
//! with `X`, `Ξ` the scaled positions and `Q = ∫q`. A boundary flux is the
//! special case `Ξ = 0` (influx) or `Ξ = 1` (outflux, entered as a sink).
//!
//! For piecewise-linear `q`, integration by parts makes `Iₙ` exact:
//!
//! ```text
//! Iₙ = q(t)/αₙ − s_end/αₙ² + Σₖ Δsₖ·e^{−αₙ(t−bₖ)}/αₙ² − e^{−αₙτ}·(q(t₀)/αₙ − s₀/αₙ²)
//! ```
//!
//! The first two terms are summed in closed form through the Clausen-type
//! identities [`cos_sum_2`] and [`cos_sum_4`]; only the exponentially damped
//! remainder is summed term by term, with an explicit tail bound.

use std::f64::consts::PI;

use crate::domain::{FluxModel, Medium};
use crate::error::{Error, Result};
use crate::SeriesConfig;

/// `Σₙ cos(nθ)/n²` for any real θ.
pub fn cos_sum_2(theta: f64) -> f64 {
    let t = theta.abs() % (2.0 * PI);
    PI * PI / 6.0 - PI * t / 2.0 + t * t / 4.0
}

/// `Σₙ cos(nθ)/n⁴` for any real θ.
pub fn cos_sum_4(theta: f64) -> f64 {
    let t = theta.abs() % (2.0 * PI);
    let t2 = t * t;
    PI.powi(4) / 90.0 - PI * PI * t2 / 12.0 + PI * t2 * t / 12.0 - t2 * t2 / 48.0
}

/// `Σₙ cos(nπX)·cos(nπΞ)/n^p` for `p ∈ {2, 4}`.
fn product_sum(x: f64, xi: f64, p: u8) -> f64 {
    let f = if p == 2 { cos_sum_2 } else { cos_sum_4 };
    0.5 * (f(PI * (x - xi)) + f(PI * (x + xi)))
}

/// Upper bound of `Σ_{n>N} e^{−λn²}/n^p` for λ ≥ 0, p ≥ 2.
pub fn tail_bound(lambda: f64, n: usize, p: i32) -> f64 {
    let n = n as f64;
    let algebraic = 1.0 / ((p - 1) as f64 * n.powi(p - 1));
    if lambda <= 0.0 {
        return algebraic;
    }
    let m = n + 1.0;
    let ratio = (-lambda * (2.0 * m + 1.0)).exp();
    let geometric = (-lambda * m * m).exp() / (m.powi(p) * (1.0 - ratio));
    geometric.min(algebraic)
}

/// One damped family `weight · Σ cos·cos · e^{−α n² lag} / n^p`.
struct Damped {
    weight: f64,
    lag: f64,
    p: i32,
}

/// A sealed interval carrying the modal basis.
#[derive(Debug, Clone, Copy)]
pub struct Interval {
    pub lo: f64,
    pub len: f64,
    pub medium: Medium,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, medium: Medium) -> Self {
        Interval {
            lo,
            len: hi - lo,
            medium,
        }
    }

    /// Base decay rate α₁ = π²D/ℓ²; mode n decays at α₁·n².
    pub fn alpha(&self) -> f64 {
        PI * PI * self.medium.diffusivity() / (self.len * self.len)
    }

    fn scaled(&self, x: f64) -> f64 {
        ((x - self.lo) / self.len).clamp(0.0, 1.0)
    }

    /// Response at `x`, time `t`, to flux `q` injected at `xi` from `t0`.
    ///
    /// `tol` is the absolute (Pa) tolerance on the truncated tail.
    pub fn response(
        &self,
        x: f64,
        t: f64,
        t0: f64,
        xi: f64,
        q: &FluxModel,
        cfg: &SeriesConfig,
        tol: f64,
    ) -> Result<f64> {
        let tau = t - t0;
        if tau <= 0.0 {
            return Ok(0.0);
        }
        let scale = self.medium.c2() / self.len;
        let alpha = self.alpha();
        let (sx, sxi) = (self.scaled(x), self.scaled(xi));

        let q_t = q.value_at(t);
        let q_0 = q.value_at(t0);
        let (s_first, s_end, jumps) = slopes(q, t0, t);

        let steady = q_t / alpha * product_sum(sx, sxi, 2)
            - s_end / (alpha * alpha) * product_sum(sx, sxi, 4);

        let mut damped = vec![
            Damped {
                weight: -q_0 / alpha,
                lag: tau,
                p: 2,
            },
            Damped {
                weight: s_first / (alpha * alpha),
                lag: tau,
                p: 4,
            },
        ];
        damped.extend(jumps.into_iter().map(|(b, ds)| Damped {
            weight: ds / (alpha * alpha),
            lag: t - b,
            p: 4,
        }));
        damped.retain(|d| d.weight != 0.0);

        let transient = self.damped_sum(sx, sxi, &damped, 2.0 * scale, cfg, tol)?;
        Ok(scale * (q.integral(t0, t) + 2.0 * steady) + transient)
    }

    /// `factor · Σ_d Σₙ cos(nπX)cos(nπΞ)·w_d·e^{−α n² lag_d}/n^{p_d}` truncated
    /// once the bound on the remainder drops below `tol`.
    fn damped_sum(
        &self,
        sx: f64,
        sxi: f64,
        families: &[Damped],
        factor: f64,
        cfg: &SeriesConfig,
        tol: f64,
    ) -> Result<f64> {
        if families.is_empty() {
            return Ok(0.0);
        }
        let alpha = self.alpha();
        let bound_after = |n: usize| -> f64 {
            families
                .iter()
                .map(|d| factor * d.weight.abs() * tail_bound(alpha * d.lag, n, d.p))
                .sum()
        };
        let mut sum = 0.0;
        let mut bound = f64::INFINITY;
        for n in 1..=cfg.n_max {
            let nf = n as f64;
            let kernel = (nf * PI * sx).cos() * (nf * PI * sxi).cos();
            let term: f64 = families
                .iter()
                .map(|d| d.weight * (-alpha * nf * nf * d.lag).exp() / nf.powi(d.p))
                .sum();
            sum += kernel * term;
            bound = bound_after(n);
            if bound <= tol {
                return Ok(factor * sum);
            }
        }
        Err(Error::Truncation {
            n_max: cfg.n_max,
            bound,
            tolerance: tol,
        })
    }

    /// Closed-form `Σ cos(nπX)cos(nπΞ)/n²`, exposed for the explicit laws.
    pub fn steady_kernel(&self, x: f64, xi: f64) -> f64 {
        product_sum(self.scaled(x), self.scaled(xi), 2)
    }

    /// `factor · Σₙ cos(nπX)cos(nπΞ)·e^{−α n² lag}/n²`, truncated adaptively.
    pub fn damped_kernel(
        &self,
        x: f64,
        xi: f64,
        lag: f64,
        factor: f64,
        cfg: &SeriesConfig,
        tol: f64,
    ) -> Result<f64> {
        let family = [Damped {
            weight: 1.0,
            lag,
            p: 2,
        }];
        self.damped_sum(self.scaled(x), self.scaled(xi), &family, factor, cfg, tol)
    }
}

/// Slope on the first and last piece of `q` over `(t0, t)`, plus each interior
/// knot with its slope change.
fn slopes(q: &FluxModel, t0: f64, t: f64) -> (f64, f64, Vec<(f64, f64)>) {
    let knots = q.knots_in(t0, t);
    let mut nodes = Vec::with_capacity(knots.len() + 2);
    nodes.push(t0);
    nodes.extend(&knots);
    nodes.push(t);
    let pieces: Vec<f64> = nodes
        .windows(2)
        .map(|w| (q.value_at(w[1]) - q.value_at(w[0])) / (w[1] - w[0]))
        .collect();
    let jumps = knots
        .iter()
        .zip(pieces.windows(2))
        .map(|(b, w)| (*b, w[1] - w[0]))
        .filter(|(_, ds)| *ds != 0.0)
        .collect();
    (pieces[0], pieces[pieces.len() - 1], jumps)
}
