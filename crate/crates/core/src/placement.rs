//! Connector layout and the isolation-valve pair around a leak.
//!
//! Connectors sit at every interior multiple of the spacing; the stations at
//! `x = 0` and `x = L` are not connectors. A leak inside bay `n` is isolated
//! by the valves at `(n - 1)·step` and `n·step`.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};

/// What to do with a leak lying exactly on a connector.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    #[default]
    Reject,
    /// Treat the leak as the downstream end of the bay upstream of it.
    BracketUpstream,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValvePair {
    pub ell1: f64,
    pub ell3: f64,
    /// Bay index, `ell3 = n·step`.
    pub n: u32,
    /// Fractional complement `a = n - ell2/step`, in `(0, 1]`.
    pub fraction: f64,
}

impl ValvePair {
    pub fn span(&self) -> f64 {
        self.ell3 - self.ell1
    }
}

/// Number of bays, or a geometry error if `length` is not a whole number of steps.
fn bay_count(step: f64, length: f64) -> Result<u32> {
    positive("line.step", step)?;
    positive("line.length", length)?;
    if step > length {
        return Err(Error::Geometry {
            field: "line.step",
            reason: format!("connector spacing {step} m exceeds line length {length} m"),
        });
    }
    let ratio = length / step;
    let bays = ratio.round();
    if (ratio - bays).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Geometry {
            field: "line.step",
            reason: format!("line length {length} m is not a multiple of the spacing {step} m"),
        });
    }
    Ok(bays as u32)
}

/// Interior connector positions `[step, 2·step, …, L − step]`.
pub fn connector_positions(step: f64, length: f64) -> Result<Vec<f64>> {
    let bays = bay_count(step, length)?;
    Ok((1..bays).map(|k| k as f64 * step).collect())
}

/// Valve pair with the default (rejecting) tie-break.
pub fn locate_isolation_valves(ell2: f64, step: f64, length: f64) -> Result<ValvePair> {
    locate_isolation_valves_with(ell2, step, length, TieBreak::Reject)
}

pub fn locate_isolation_valves_with(
    ell2: f64,
    step: f64,
    length: f64,
    tie: TieBreak,
) -> Result<ValvePair> {
    let bays = bay_count(step, length)?;
    if !(ell2.is_finite() && ell2 > 0.0 && ell2 < length) {
        return Err(Error::Geometry {
            field: "leak.position",
            reason: format!("leak at {ell2} m lies outside the line (0, {length})"),
        });
    }
    let ratio = ell2 / step;
    let whole = ratio.round();
    let on_connector = (ratio - whole).abs() <= 1e-12 * ratio.max(1.0);
    let n = if on_connector {
        match tie {
            TieBreak::Reject => {
                return Err(Error::OnConnector {
                    position: ell2,
                    index: whole as u32,
                })
            }
            TieBreak::BracketUpstream => whole as u32,
        }
    } else {
        ratio.floor() as u32 + 1
    };
    if n > bays {
        return Err(Error::Geometry {
            field: "leak.position",
            reason: format!(
                "right valve {} m would lie beyond the line end",
                n as f64 * step
            ),
        });
    }
    let ell3 = n as f64 * step;
    Ok(ValvePair {
        ell1: ell3 - step,
        ell3,
        n,
        fraction: n as f64 - ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_leak_is_bracketed_by_the_second_bay() {
        let p = locate_isolation_valves(14_500.0, 10_000.0, 30_000.0).unwrap();
        assert_eq!((p.ell1, p.ell3, p.n), (10_000.0, 20_000.0, 2));
        assert!((p.fraction - 0.55).abs() < 1e-12);
    }

    #[test]
    fn short_step_matches_a_brute_force_scan() {
        let p = locate_isolation_valves(3_200.0, 2_000.0, 30_000.0).unwrap();
        let k = (1..=15).find(|k| *k as f64 * 2_000.0 > 3_200.0).unwrap();
        assert_eq!(p.ell3, k as f64 * 2_000.0);
        assert_eq!((p.ell1, p.ell3, p.n), (2_000.0, 4_000.0, 2));
    }

    #[test]
    fn leak_on_a_connector_is_rejected_by_default() {
        let err = locate_isolation_valves(10_000.0, 10_000.0, 30_000.0).unwrap_err();
        assert_eq!(
            err,
            Error::OnConnector {
                position: 10_000.0,
                index: 1
            }
        );
        let p =
            locate_isolation_valves_with(10_000.0, 10_000.0, 30_000.0, TieBreak::BracketUpstream)
                .unwrap();
        assert_eq!((p.ell1, p.ell3), (0.0, 10_000.0));
    }

    #[test]
    fn connectors_exclude_the_stations() {
        assert_eq!(
            connector_positions(10_000.0, 30_000.0).unwrap(),
            vec![10_000.0, 20_000.0]
        );
        assert!(connector_positions(30_000.0, 30_000.0).unwrap().is_empty());
        assert!(matches!(
            connector_positions(7_000.0, 30_000.0),
            Err(Error::Geometry { .. })
        ));
    }

    #[test]
    fn leak_outside_the_line_is_a_geometry_error() {
        assert!(matches!(
            locate_isolation_valves(35_000.0, 10_000.0, 30_000.0),
            Err(Error::Geometry { .. })
        ));
    }

    proptest! {
        #[test]
        fn pair_brackets_the_leak(bays in 1u32..40, step in 100.0f64..20_000.0, u in 0.0f64..1.0) {
            let length = bays as f64 * step;
            let ell2 = (u * length).clamp(1e-6 * length, length * (1.0 - 1e-6));
            prop_assume!(((ell2 / step) - (ell2 / step).round()).abs() > 1e-9);
            let p = locate_isolation_valves(ell2, step, length).unwrap();
            prop_assert!(p.ell1 < ell2 && ell2 < p.ell3);
            prop_assert!((p.ell3 - p.ell1 - step).abs() <= 1e-9 * step);
            prop_assert!(p.ell3 <= length * (1.0 + 1e-12));
            prop_assert!(p.fraction > 0.0 && p.fraction <= 1.0);
        }

        #[test]
        fn pair_is_constant_within_a_bay(bay in 1u32..10, a in 0.01f64..0.99, b in 0.01f64..0.99) {
            let step = 1_000.0;
            let length = 10.0 * step;
            let lo = (bay - 1) as f64 * step;
            let pa = locate_isolation_valves(lo + a * step, step, length).unwrap();
            let pb = locate_isolation_valves(lo + b * step, step, length).unwrap();
            prop_assert_eq!((pa.ell1, pa.ell3, pa.n), (pb.ell1, pb.ell3, pb.n));
        }
    }
}
