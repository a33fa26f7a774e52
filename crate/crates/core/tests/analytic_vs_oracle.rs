use approx::assert_relative_eq;

use linepack_core::analytic::{build_states, section_pressure, SectionFit};
use linepack_core::oracle::{fd_solve, mass_balance_residual, FdConfig};
use linepack_core::reference;
use linepack_core::{
    validate, FluxModel, Medium, PointLeak, SampledCurve, SectionState, SeriesConfig,
};

fn max_deviation(state: &SectionState, cfg: &FdConfig, settle: f64) -> f64 {
    let series = SeriesConfig::default();
    let field = fd_solve(state, cfg).unwrap();
    let mut worst: f64 = 0.0;
    for (ix, x) in field.xs.iter().enumerate().step_by(5) {
        for (it, t) in field.ts.iter().enumerate().step_by(7) {
            if t - state.t1 < settle {
                continue;
            }
            let p = section_pressure(state, *x, *t, &series).unwrap();
            worst = worst.max((field.get(ix, it) - p).abs() / p);
        }
    }
    worst
}

#[test]
fn reference_sections_agree_with_oracle() {
    let (p, s) = reference::scenario();
    let v = validate(p, s).unwrap();
    let states = build_states(&v, &reference::fit(), &SeriesConfig::default()).unwrap();
    for state in &states {
        let cfg = FdConfig::new(100.0, 1.0, state.t1 + 600.0);
        let dev = max_deviation(state, &cfg, 10.0);
        assert!(dev < 1e-3, "section {:?}: {dev}", state.id);
        let field = fd_solve(state, &cfg).unwrap();
        assert!(mass_balance_residual(&field, state, cfg.theta).unwrap() < 1e-10);
    }
}

#[test]
fn ramp_leak_agrees_with_oracle() {
    let (p, mut s) = reference::scenario();
    s.flux = FluxModel::piecewise(vec![0.0, 400.0, 700.0], vec![1.0, 9.0, 3.0]);
    let v = validate(p, s).unwrap();
    let states = build_states(&v, &reference::fit(), &SeriesConfig::default()).unwrap();
    let cfg = FdConfig::new(100.0, 1.0, 900.0);
    assert!(max_deviation(&states[1], &cfg, 10.0) < 1e-3);
}

#[test]
fn preclosure_derived_states_agree_with_oracle() {
    let (p, s) = reference::scenario();
    let v = validate(p, s).unwrap();
    let states = build_states(&v, &SectionFit::default(), &SeriesConfig::default()).unwrap();
    for state in &states {
        let cfg = FdConfig::new(100.0, 1.0, state.t1 + 300.0);
        assert!(max_deviation(state, &cfg, 10.0) < 1e-3);
    }
}

#[test]
fn sealed_section_without_leak_is_exact() {
    let medium = Medium {
        c: 383.3,
        two_a: 0.1,
    };
    let profile = SampledCurve::from_fn(0.0, 8_000.0, 8, |_| 1.25e5).unwrap();
    let state = SectionState::leaking(
        medium,
        100.0,
        0.0,
        8_000.0,
        profile,
        PointLeak {
            position: 3_000.0,
            flux: FluxModel::zero(),
        },
    )
    .unwrap();
    let cfg = SeriesConfig::default();
    for t in [100.0, 150.0, 700.0] {
        for x in [0.0, 3_000.0, 8_000.0] {
            assert_relative_eq!(
                section_pressure(&state, x, t, &cfg).unwrap(),
                1.25e5,
                max_relative = 1e-12
            );
        }
    }
    let field = fd_solve(&state, &FdConfig::new(500.0, 5.0, 400.0)).unwrap();
    assert!(field
        .values
        .iter()
        .all(|p| (p - 1.25e5).abs() <= 1e-9 * 1.25e5));
}
