//! Reference calibration: a 30 km line with a leak at 14.5 km, the
//! tabulated pressures it is fitted to, and a cell-by-cell comparator.
//!
//! Pressures in the tables are in 10⁻² MPa; positions in km; columns are
//! seconds after valve closure.

use serde::{Deserialize, Serialize};

use crate::analytic::{InitialProfile, SectionFit};
use crate::domain::{
    km_to_m, pa_to_table_unit, table_unit_to_pa, FluxModel, LeakScenario, LineMeta, LineParams,
    PressureField,
};
use crate::error::Result;
use crate::placement::TieBreak;

/// Column offsets of tables 2 to 4, seconds after closure.
pub const OFFSETS: [f64; 11] = [
    0.0, 60.0, 120.0, 180.0, 240.0, 300.0, 360.0, 420.0, 480.0, 540.0, 600.0,
];

/// Whole-line profile at the closure time, `(x_km, P)`.
pub const TABLE1: [(f64, f64); 7] = [
    (0.0, 13.36),
    (5.0, 12.82),
    (10.0, 12.19),
    (14.5, 11.56),
    (20.0, 11.24),
    (25.0, 10.86),
    (30.0, 10.40),
];

pub type GoldenRow = (f64, [f64; 11]);

pub const TABLE2: [GoldenRow; 3] = [
    (
        0.0,
        [
            13.36, 14.13, 14.58, 15.02, 15.46, 15.91, 16.35, 16.79, 17.24, 17.68, 18.13,
        ],
    ),
    (
        5.0,
        [
            12.82, 13.22, 13.67, 14.11, 14.55, 15.0, 15.44, 15.89, 16.33, 16.77, 17.22,
        ],
    ),
    (
        10.0,
        [
            12.19, 12.47, 12.91, 13.36, 13.8, 14.24, 14.69, 15.13, 15.57, 16.02, 16.46,
        ],
    ),
];

pub const TABLE3: [GoldenRow; 3] = [
    (
        10.0,
        [
            12.19, 11.77, 11.32, 10.87, 10.43, 9.98, 9.54, 9.1, 8.65, 8.21, 7.77,
        ],
    ),
    (
        14.5,
        [
            11.56, 11.03, 10.59, 10.15, 9.7, 9.26, 8.81, 8.37, 7.93, 7.48, 7.04,
        ],
    ),
    (
        20.0,
        [
            11.24, 10.86, 10.42, 9.97, 9.53, 9.09, 8.64, 8.2, 7.75, 7.31, 6.87,
        ],
    ),
];

pub const TABLE4: [GoldenRow; 3] = [
    (
        20.0,
        [
            11.24, 10.96, 10.52, 10.08, 9.63, 9.19, 8.74, 8.3, 7.86, 7.41, 6.97,
        ],
    ),
    (
        25.0,
        [
            10.86, 10.46, 10.01, 9.57, 9.13, 8.68, 8.24, 7.8, 7.35, 6.91, 6.46,
        ],
    ),
    (
        30.0,
        [
            10.4, 9.63, 9.19, 8.74, 8.3, 7.85, 7.41, 6.97, 6.52, 6.08, 5.63,
        ],
    ),
];

/// Section tables in section order.
pub const SECTION_TABLES: [&[GoldenRow; 3]; 3] = [&TABLE2, &TABLE3, &TABLE4];

pub fn params() -> LineParams {
    LineParams {
        c: 383.3,
        two_a: 0.1,
        length: 30_000.0,
        step: 10_000.0,
        p_inlet: 14.0e4,
        p_outlet: 11.0e4,
        flux_inlet: 10.0,
        flux_outlet: 10.0,
        eps: 1.35,
        meta: LineMeta::default(),
    }
}

pub fn scenario() -> (LineParams, LeakScenario) {
    let scenario = LeakScenario {
        position: 14_500.0,
        closure_time: 300.0,
        flux: FluxModel::constant(5.0),
        horizon: 1_800.0,
        x_grid: TABLE1.iter().map(|(x, _)| km_to_m(*x)).collect(),
        t_grid: OFFSETS.to_vec(),
        tie_break: TieBreak::Reject,
    };
    (params(), scenario)
}

/// Gradient terms and closure profile of the calibration. The inlet term
/// halves the net inflow to 5 Pa·s/m; the outlet term does the same for the
/// offtake.
pub fn fit() -> SectionFit {
    SectionFit {
        g_lo: -0.5,
        g_hi: -0.5,
        initial: InitialProfile::Samples {
            x: TABLE1.iter().map(|(x, _)| km_to_m(*x)).collect(),
            p: TABLE1.iter().map(|(_, p)| table_unit_to_pa(*p)).collect(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDiff {
    pub table: u8,
    pub x_km: f64,
    pub t_s: f64,
    pub expected: f64,
    pub computed: f64,
    pub rel_err: f64,
    pub within: bool,
}

/// Compares a field against a golden table. `closure_time` maps the table's
/// offsets onto the field's absolute times.
pub fn compare_table(
    table: u8,
    rows: &[GoldenRow],
    field: &PressureField,
    closure_time: f64,
    tolerance: f64,
) -> Result<Vec<CellDiff>> {
    let mut out = Vec::with_capacity(rows.len() * OFFSETS.len());
    for (x_km, values) in rows {
        for (t_s, expected) in OFFSETS.iter().zip(values) {
            let computed = pa_to_table_unit(field.interpolate(km_to_m(*x_km), closure_time + t_s)?);
            let rel_err = (computed - expected).abs() / expected.abs();
            out.push(CellDiff {
                table,
                x_km: *x_km,
                t_s: *t_s,
                expected: *expected,
                computed,
                rel_err,
                within: rel_err <= tolerance,
            });
        }
    }
    Ok(out)
}
