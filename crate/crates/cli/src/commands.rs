use std::path::Path;

use serde::Serialize;

use linepack_core::analytic::{
    build_states, preclosure_profile, section_field, section_pressure, PreclosureForm,
};
use linepack_core::dispatch::{activation_time, dispatch_report, ActivationMethod};
use linepack_core::domain::{km_to_m, pa_to_table_unit, FieldSource};
use linepack_core::oracle::{
    convergence_order, fd_solve, fd_solve_line, mass_balance_residual, FdConfig, Formulation,
};
use linepack_core::reference::{self, CellDiff, TABLE1};
use linepack_core::{
    validate, FluxModel, PressureField, SampledCurve, SectionState, SeriesConfig, ValidatedScenario,
};

use crate::config::{self, ScenarioFile};
use crate::error::{CliError, CliResult};
use crate::output::{
    atomic_write, config_digest, ensure_dir, field_csv, sig6, write_json, Manifest, PressureUnit,
};

/// Runs one closure per section on its own thread, in section order.
fn per_section<T: Send>(
    states: &[SectionState; 3],
    f: impl Fn(&SectionState) -> linepack_core::Result<T> + Sync,
) -> CliResult<[T; 3]> {
    let results = std::thread::scope(|scope| {
        let handles: Vec<_> = states.iter().map(|s| scope.spawn(|| f(s))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("section worker panicked"))
            .collect::<Vec<_>>()
    });
    let mut out = Vec::with_capacity(3);
    for r in results {
        out.push(r?);
    }
    Ok(out.try_into().unwrap_or_else(|_| unreachable!()))
}

fn prepare(file: &ScenarioFile) -> CliResult<(ValidatedScenario, [SectionState; 3])> {
    let (params, scenario) = file.scenario();
    let v = validate(params, scenario)?;
    let fit = file.section_fit()?;
    let states = build_states(&v, &fit, &file.series)?;
    Ok((v, states))
}

fn output_times(v: &ValidatedScenario) -> Vec<f64> {
    let s = v.scenario();
    s.t_grid.iter().map(|dt| s.closure_time + dt).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub outputs: Vec<String>,
    pub t1: f64,
    pub t2: f64,
}

/// `run`: section CSVs, timeline, dispatch report and manifest.
pub fn run(file: &ScenarioFile, out: &Path, si: bool) -> CliResult<RunSummary> {
    let (v, states) = prepare(file)?;
    let ts = output_times(&v);
    let x_grid = v.scenario().x_grid.clone();
    let cfg = file.series;
    let fields = per_section(&states, |s| section_field(s, &x_grid, &ts, &cfg))?;
    let (report, timeline) = dispatch_report(&v, &states, &cfg)?;

    ensure_dir(out)?;
    let unit = if si {
        PressureUnit::Pascal
    } else {
        PressureUnit::Table
    };
    let t1 = v.closure_time();
    let mut outputs = Vec::new();
    for (k, field) in fields.iter().enumerate() {
        let name = format!("section{}.csv", k + 1);
        atomic_write(&out.join(&name), field_csv(field, t1, unit).as_bytes())?;
        outputs.push(name);
    }
    write_json(&out.join("timeline.json"), &timeline)?;
    outputs.push("timeline.json".into());
    write_json(&out.join("dispatch.json"), &report)?;
    outputs.push("dispatch.json".into());
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: "run",
        si,
        input_sha256: config_digest(file),
        outputs: outputs.clone(),
        config: file,
    };
    write_json(&out.join("manifest.json"), &manifest)?;
    outputs.push("manifest.json".into());
    Ok(RunSummary {
        outputs,
        t1,
        t2: report.t2,
    })
}

/// Solver settings used to arbitrate table cells.
pub const TABLE_FD_DX: f64 = 100.0;
pub const TABLE_FD_DT: f64 = 1.0;
/// Agreement required between series and oracle on an out-of-tolerance cell.
pub const ORACLE_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
pub struct TableCell {
    #[serde(flatten)]
    pub diff: CellDiff,
    /// Oracle value in table units.
    pub fd: f64,
    /// |series − oracle| / oracle.
    pub fd_rel_dev: f64,
    /// Outside tolerance but matched by the oracle: the table, not the model, disagrees.
    pub explained: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableSummary {
    pub tolerance: f64,
    pub oracle_tolerance: f64,
    pub cells: usize,
    pub within: usize,
    pub fraction_within: f64,
    pub outliers: usize,
    pub outliers_explained: bool,
    pub table1_series_within: bool,
    pub table1_fd_within: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TablesReport {
    pub summary: TableSummary,
    pub table1: Vec<TableCell>,
    pub cells: Vec<TableCell>,
}

fn with_oracle(diff: CellDiff, fd_pa: f64, oracle_tol: f64) -> TableCell {
    let fd = pa_to_table_unit(fd_pa);
    let fd_rel_dev = (diff.computed - fd).abs() / fd.abs();
    let explained = !diff.within && fd_rel_dev <= oracle_tol;
    TableCell {
        diff,
        fd,
        fd_rel_dev,
        explained,
    }
}

/// Reproduces the four reference tables and compares every cell.
pub fn reproduce_tables(tolerance: f64) -> CliResult<(TablesReport, [String; 4])> {
    let file = config::bundled();
    let (v, states) = prepare(&file)?;
    let cfg = file.series;
    let t1 = v.closure_time();
    let ts = output_times(&v);
    let x_grid = v.scenario().x_grid.clone();
    let horizon = ts.last().copied().unwrap_or(t1);

    let fields = per_section(&states, |s| section_field(s, &x_grid, &ts, &cfg))?;
    let oracle_cfg = FdConfig::new(TABLE_FD_DX, TABLE_FD_DT, horizon);
    let oracles = per_section(&states, |s| fd_solve(s, &oracle_cfg))?;

    let mut cells = Vec::new();
    for (k, (field, oracle)) in fields.iter().zip(&oracles).enumerate() {
        let diffs = reference::compare_table(
            k as u8 + 2,
            reference::SECTION_TABLES[k],
            field,
            t1,
            tolerance,
        )?;
        for d in diffs {
            let fd = oracle.interpolate(km_to_m(d.x_km), t1 + d.t_s)?;
            cells.push(with_oracle(d, fd, ORACLE_TOLERANCE));
        }
    }

    let line = fd_solve_line(&v, &FdConfig::new(TABLE_FD_DX, TABLE_FD_DT, t1))?;
    let mut table1 = Vec::new();
    let mut profile = Vec::new();
    for (x_km, expected) in TABLE1 {
        let x = km_to_m(x_km);
        let p = preclosure_profile(x, t1, &v, &cfg, PreclosureForm::Simplified)?;
        profile.push(p);
        let computed = pa_to_table_unit(p);
        let rel_err = (computed - expected).abs() / expected;
        let diff = CellDiff {
            table: 1,
            x_km,
            t_s: t1,
            expected,
            computed,
            rel_err,
            within: rel_err <= tolerance,
        };
        table1.push(with_oracle(
            diff,
            line.interpolate(x, t1)?,
            ORACLE_TOLERANCE,
        ));
    }

    let within = cells.iter().filter(|c| c.diff.within).count();
    let outliers: Vec<&TableCell> = cells.iter().filter(|c| !c.diff.within).collect();
    let summary = TableSummary {
        tolerance,
        oracle_tolerance: ORACLE_TOLERANCE,
        cells: cells.len(),
        within,
        fraction_within: within as f64 / cells.len() as f64,
        outliers: outliers.len(),
        outliers_explained: outliers.iter().all(|c| c.explained),
        table1_series_within: table1.iter().all(|c| c.diff.within),
        table1_fd_within: table1
            .iter()
            .all(|c| (c.fd - c.diff.expected).abs() / c.diff.expected <= tolerance),
    };

    let table1_field = PressureField::new(
        None,
        TABLE1.iter().map(|(x, _)| km_to_m(*x)).collect(),
        vec![t1],
        profile,
        FieldSource::Analytic,
    )?;
    let csvs = [
        field_csv(&table1_field, 0.0, PressureUnit::Table),
        field_csv(&fields[0], t1, PressureUnit::Table),
        field_csv(&fields[1], t1, PressureUnit::Table),
        field_csv(&fields[2], t1, PressureUnit::Table),
    ];
    Ok((
        TablesReport {
            summary,
            table1,
            cells,
        },
        csvs,
    ))
}

/// `tables`: writes `table1.csv` … `table4.csv` and `table_diff.json`.
pub fn tables(out: &Path, tolerance: f64) -> CliResult<TableSummary> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(CliError::Config(format!(
            "`--tolerance` must be a positive number (got {tolerance})"
        )));
    }
    let (report, csvs) = reproduce_tables(tolerance)?;
    ensure_dir(out)?;
    for (k, csv) in csvs.iter().enumerate() {
        atomic_write(&out.join(format!("table{}.csv", k + 1)), csv.as_bytes())?;
    }
    write_json(&out.join("table_diff.json"), &report)?;
    Ok(report.summary)
}

/// Thresholds applied by `verify`.
pub const MAX_DEVIATION: f64 = 0.01;
pub const MAX_MASS_RESIDUAL: f64 = 1e-8;
pub const SMOOTH_ORDER: f64 = 2.0;
pub const SMOOTH_ORDER_TOL: f64 = 0.2;
pub const LEAK_ORDER_MIN: f64 = 1.0;
/// Early times excluded from the deviation statistics, seconds after closure.
pub const SETTLING: f64 = 10.0;

const STUDY_DT: f64 = 0.05;
const SMOOTH_RUN: f64 = 5.0;
const LEAK_RUN: f64 = 40.0;
const STUDY_GRIDS: usize = 4;
const LEAK_DX_CANDIDATES: [f64; 10] = [
    500.0, 400.0, 250.0, 200.0, 125.0, 100.0, 50.0, 25.0, 10.0, 5.0,
];

#[derive(Debug, Clone, Serialize)]
pub struct SectionCheck {
    pub section: u8,
    pub max_rel_dev: f64,
    pub mean_rel_dev: f64,
    pub mass_balance_residual: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderCheck {
    pub order: Option<f64>,
    pub dx: Vec<f64>,
    pub note: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ActivationCheck {
    pub closed_t2: Option<f64>,
    pub root_t2: Option<f64>,
    pub closed_error: Option<String>,
    pub root_error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub fd: FdConfig,
    pub sections: Vec<SectionCheck>,
    pub smooth_order: OrderCheck,
    pub leak_order: OrderCheck,
    pub activation: ActivationCheck,
}

fn compare_section(
    state: &SectionState,
    fd: &FdConfig,
    cfg: &SeriesConfig,
) -> linepack_core::Result<SectionCheck> {
    let field = fd_solve(state, fd)?;
    let mut worst: f64 = 0.0;
    let mut sum = 0.0;
    let mut count = 0usize;
    for (ix, x) in field.xs.iter().enumerate() {
        for (it, t) in field.ts.iter().enumerate() {
            if t - state.t1 < SETTLING {
                continue;
            }
            let series = section_pressure(state, *x, *t, cfg)?;
            let dev = (field.get(ix, it) - series).abs() / series.abs();
            worst = worst.max(dev);
            sum += dev;
            count += 1;
        }
    }
    let residual = mass_balance_residual(&field, state, fd.theta)?;
    Ok(SectionCheck {
        section: state.id.number(),
        max_rel_dev: worst,
        mean_rel_dev: if count > 0 { sum / count as f64 } else { 0.0 },
        mass_balance_residual: residual,
        passed: worst <= MAX_DEVIATION && residual < MAX_MASS_RESIDUAL,
    })
}

/// Sealed section on the span of section 1 with a half-cosine profile.
fn smooth_study(state: &SectionState) -> linepack_core::Result<OrderCheck> {
    let len = state.len();
    let mean = state.p_init.eval(state.x_lo);
    let amplitude = 0.05 * mean;
    let fine = 10 * (1 << (STUDY_GRIDS + 3));
    let profile = SampledCurve::from_fn(state.x_lo, state.x_hi, fine, |x| {
        mean + amplitude * (std::f64::consts::PI * (x - state.x_lo) / len).cos()
    })?;
    let sealed = SectionState::upstream(
        state.medium,
        state.t1,
        state.x_hi,
        profile,
        FluxModel::zero(),
        0.0,
    )?;
    let mut cfg = FdConfig::new(len / 10.0, STUDY_DT, state.t1 + SMOOTH_RUN);
    cfg.formulation = Formulation::Full;
    let report = convergence_order(&sealed, &cfg, STUDY_GRIDS)?;
    Ok(OrderCheck {
        order: Some(report.order),
        passed: (report.order - SMOOTH_ORDER).abs() <= SMOOTH_ORDER_TOL,
        dx: report.dx,
        note: None,
    })
}

fn divides(span: f64, dx: f64) -> bool {
    let r = span / dx;
    (r - r.round()).abs() <= 1e-9 * r.max(1.0)
}

/// Point-leak study on section 2, coarsest grid chosen so every level keeps
/// the leak on a node.
fn leak_study(state: &SectionState) -> linepack_core::Result<OrderCheck> {
    let offset = state.leak.as_ref().map_or(0.0, |l| l.position - state.x_lo);
    let Some(dx) = LEAK_DX_CANDIDATES
        .iter()
        .copied()
        .find(|dx| divides(state.len(), *dx) && divides(offset, *dx) && state.len() / dx >= 4.0)
    else {
        return Ok(OrderCheck {
            order: None,
            dx: Vec::new(),
            note: Some("no candidate grid places the leak on a node; study skipped".into()),
            passed: true,
        });
    };
    let cfg = FdConfig::new(dx, STUDY_DT, state.t1 + LEAK_RUN);
    let report = convergence_order(state, &cfg, STUDY_GRIDS)?;
    Ok(OrderCheck {
        order: Some(report.order),
        passed: report.order >= LEAK_ORDER_MIN,
        dx: report.dx,
        note: None,
    })
}

/// `verify`: series against oracle on identical states.
pub fn verify(file: &ScenarioFile) -> CliResult<VerifyReport> {
    let (v, states) = prepare(file)?;
    let fd = file.fd_config()?;
    let cfg = file.series;
    let sections = per_section(&states, |s| compare_section(s, &fd, &cfg))?;
    let smooth_order = smooth_study(&states[0])?;
    let leak_order = leak_study(&states[1])?;
    let horizon = v.scenario().horizon;
    let closed = activation_time(
        v.params(),
        &states[0],
        &cfg,
        ActivationMethod::Closed,
        horizon,
    );
    let root = activation_time(
        v.params(),
        &states[0],
        &cfg,
        ActivationMethod::Root,
        horizon,
    );
    let activation = ActivationCheck {
        closed_t2: closed.as_ref().ok().map(|a| a.t2),
        root_t2: root.as_ref().ok().map(|a| a.t2),
        closed_error: closed.err().map(|e| e.to_string()),
        root_error: root.err().map(|e| e.to_string()),
    };
    let passed = sections.iter().all(|s| s.passed) && smooth_order.passed && leak_order.passed;
    Ok(VerifyReport {
        passed,
        fd,
        sections: sections.to_vec(),
        smooth_order,
        leak_order,
        activation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum T2Method {
    Closed,
    Root,
    Both,
}

#[derive(Debug, Clone, Serialize)]
pub struct T2Entry {
    pub method: ActivationMethod,
    pub t2: Option<f64>,
    pub since_closure: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct T2Report {
    pub t1: f64,
    pub limit_pa: f64,
    pub results: Vec<T2Entry>,
}

impl T2Report {
    pub fn failed(&self) -> bool {
        self.results.iter().any(|r| r.error.is_some())
    }
}

/// `t2`: connector activation time by the requested method(s).
pub fn t2(file: &ScenarioFile, method: T2Method) -> CliResult<T2Report> {
    let (v, states) = prepare(file)?;
    let methods: &[ActivationMethod] = match method {
        T2Method::Closed => &[ActivationMethod::Closed],
        T2Method::Root => &[ActivationMethod::Root],
        T2Method::Both => &[ActivationMethod::Closed, ActivationMethod::Root],
    };
    let horizon = v.scenario().horizon;
    let results = methods
        .iter()
        .map(
            |m| match activation_time(v.params(), &states[0], &file.series, *m, horizon) {
                Ok(a) => T2Entry {
                    method: *m,
                    t2: Some(a.t2),
                    since_closure: Some(a.delta),
                    error: None,
                },
                Err(e) => T2Entry {
                    method: *m,
                    t2: None,
                    since_closure: None,
                    error: Some(e.to_string()),
                },
            },
        )
        .collect();
    Ok(T2Report {
        t1: v.closure_time(),
        limit_pa: v.params().eps * v.params().p_inlet,
        results,
    })
}

/// One-line human summary for stderr.
pub fn describe_t2(report: &T2Report) -> String {
    report
        .results
        .iter()
        .map(|r| match (r.t2, &r.error) {
            (Some(t2), _) => format!("{:?}: t2 = {} s", r.method, sig6(t2)),
            (None, Some(e)) => format!("{:?}: {e}", r.method),
            _ => String::new(),
        })
        .collect::<Vec<_>>()
        .join("; ")
}
