use proptest::prelude::*;

use linepack_core::analytic::{build_states, section_pressure, SectionFit};
use linepack_core::dispatch::{dispatch_report, leaked_mass};
use linepack_core::oracle::{convergence_order, FdConfig};
use linepack_core::reference;
use linepack_core::{validate, Error, FluxModel, LeakScenario, LineParams, SeriesConfig, TieBreak};

fn scenario(ell2: f64, leak: f64, eps: f64) -> (LineParams, LeakScenario) {
    let (mut p, mut s) = reference::scenario();
    p.eps = eps;
    s.position = ell2;
    s.flux = FluxModel::constant(leak);
    s.x_grid = vec![0.0, 15_000.0, 30_000.0];
    (p, s)
}

/// Positions inside the middle bay, so every section is non-empty.
fn off_connector() -> impl Strategy<Value = f64> {
    10_001.0f64..19_999.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn validation_is_idempotent(ell2 in off_connector(), leak in 0.0f64..20.0) {
        let (p, s) = scenario(ell2, leak, 1.35);
        let once = validate(p, s).unwrap();
        let (p2, s2) = once.clone().into_parts();
        prop_assert_eq!(validate(p2, s2).unwrap(), once);
    }

    #[test]
    fn leaked_mass_is_linear_in_a_constant_leak(ell2 in off_connector(), leak in 0.1f64..20.0) {
        let cfg = SeriesConfig::default();
        let mass = |g: f64| {
            let (p, s) = scenario(ell2, g, 1.35);
            let v = validate(p, s).unwrap();
            let states = build_states(&v, &SectionFit::default(), &cfg).unwrap();
            leaked_mass(&states[1], 900.0, &cfg, None).unwrap()
        };
        let one = mass(leak);
        let two = mass(2.0 * leak);
        prop_assert!((one.flux_integral - 600.0 * leak).abs() <= 1e-9 * one.flux_integral);
        prop_assert!((one.linepack - one.flux_integral).abs() <= 1e-4 * one.flux_integral);
        prop_assert!((two.linepack - 2.0 * one.linepack).abs() <= 1e-4 * two.linepack);
    }

    #[test]
    fn pressures_stay_positive_on_reference_like_lines(ell2 in off_connector(), leak in 0.0f64..10.0) {
        let cfg = SeriesConfig::default();
        let (p, s) = scenario(ell2, leak, 1.35);
        let v = validate(p, s).unwrap();
        let states = build_states(&v, &SectionFit::default(), &cfg).unwrap();
        for state in &states {
            for k in 0..=4 {
                let x = state.x_lo + state.len() * k as f64 / 4.0;
                for dt in [0.0, 10.0, 300.0, 600.0] {
                    let pr = section_pressure(state, x, state.t1 + dt, &cfg).unwrap();
                    prop_assert!(pr > 0.0 && pr.is_finite());
                }
            }
        }
    }

    #[test]
    fn timeline_is_ordered_and_closures_precede_openings(eps in 1.2f64..1.6) {
        let cfg = SeriesConfig::default();
        let (p, s) = scenario(14_500.0, 5.0, eps);
        let v = validate(p, s).unwrap();
        let states = build_states(&v, &reference::fit(), &cfg).unwrap();
        let (report, timeline) = dispatch_report(&v, &states, &cfg).unwrap();
        prop_assert!(timeline.is_ordered());
        prop_assert!(report.t2 > report.t1);
        prop_assert!(report.leaked_mass_integral >= 0.0);
        prop_assert!((0.0..1.0).contains(&report.supply_deficit));
    }
}

#[test]
fn on_connector_leak_needs_a_tie_break() {
    let (p, s) = scenario(20_000.0, 5.0, 1.35);
    assert!(validate(p.clone(), s.clone()).is_err());
    let mut s = s;
    s.tie_break = TieBreak::BracketUpstream;
    let v = validate(p, s).unwrap();
    assert_eq!((v.pair().ell1, v.pair().ell3), (10_000.0, 20_000.0));
}

#[test]
fn end_bay_leak_is_a_geometry_error() {
    for ell2 in [4_000.0, 26_000.0] {
        let (p, s) = scenario(ell2, 5.0, 1.35);
        let v = validate(p, s).unwrap();
        let e = build_states(&v, &SectionFit::default(), &SeriesConfig::default());
        assert!(
            matches!(
                e,
                Err(Error::Geometry {
                    field: "leak.position",
                    ..
                })
            ),
            "{e:?}"
        );
    }
}

#[test]
fn point_leak_refinement_is_second_order() {
    let (p, s) = reference::scenario();
    let v = validate(p, s).unwrap();
    let states = build_states(&v, &reference::fit(), &SeriesConfig::default()).unwrap();
    let report = convergence_order(&states[1], &FdConfig::new(500.0, 0.05, 340.0), 4).unwrap();
    assert!(report.order > 1.5, "{}", report.order);
}
