//! Scenario files.
//!
//! ```json
//! {
//!   "line":    { "c": 383.3, "two_a": 0.1, "length": 30000, ... },
//!   "leak":    { "position": 14500, "closure_time": 300, "horizon": 1800,
//!                "flux": { "kind": "constant", "value": 5 } },
//!   "series":  { "n_max": 500, "tail_tol": 1e-10 },
//!   "fd":      { "dx": 100, "dt": 1, "theta": 0.5 },
//!   "fit":     "paper-fit",
//!   "outputs": { "x_grid": [...], "t_grid": [...] }
//! }
//! ```
//!
//! All quantities are SI. `t_grid` holds seconds after closure. Unknown keys
//! are rejected and every error names the offending key.

use std::path::Path;

use serde::{Deserialize, Serialize};

use linepack_core::analytic::SectionFit;
use linepack_core::oracle::{FdConfig, Formulation};
use linepack_core::{reference, FluxModel, LeakScenario, LineParams, SeriesConfig, TieBreak};

use crate::error::{CliError, CliResult};

/// Name of the built-in calibration accepted by `"fit"`.
pub const REFERENCE_FIT: &str = "paper-fit";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakSection {
    pub position: f64,
    pub closure_time: f64,
    pub flux: FluxModel,
    pub horizon: f64,
    #[serde(default)]
    pub tie_break: TieBreak,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdSection {
    #[serde(default = "default_dx")]
    pub dx: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub formulation: Formulation,
}

fn default_dx() -> f64 {
    100.0
}

fn default_dt() -> f64 {
    1.0
}

fn default_theta() -> f64 {
    0.5
}

impl Default for FdSection {
    fn default() -> Self {
        FdSection {
            dx: default_dx(),
            dt: default_dt(),
            theta: default_theta(),
            formulation: Formulation::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
}

/// A named calibration or an explicit one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FitSpec {
    Named(String),
    Explicit(SectionFit),
}

impl Default for FitSpec {
    fn default() -> Self {
        FitSpec::Explicit(SectionFit::default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub line: LineParams,
    pub leak: LeakSection,
    #[serde(default)]
    pub series: SeriesConfig,
    #[serde(default)]
    pub fd: FdSection,
    #[serde(default)]
    pub fit: FitSpec,
    pub outputs: OutputsSection,
}

impl ScenarioFile {
    pub fn scenario(&self) -> (LineParams, LeakScenario) {
        let leak = &self.leak;
        (
            self.line.clone(),
            LeakScenario {
                position: leak.position,
                closure_time: leak.closure_time,
                flux: leak.flux.clone(),
                horizon: leak.horizon,
                x_grid: self.outputs.x_grid.clone(),
                t_grid: self.outputs.t_grid.clone(),
                tie_break: leak.tie_break,
            },
        )
    }

    pub fn section_fit(&self) -> CliResult<SectionFit> {
        match &self.fit {
            FitSpec::Named(name) if name == REFERENCE_FIT => Ok(reference::fit()),
            FitSpec::Named(name) => Err(CliError::Config(format!(
                "`fit`: unknown calibration \"{name}\" (known: \"{REFERENCE_FIT}\")"
            ))),
            FitSpec::Explicit(fit) => Ok(fit.clone()),
        }
    }

    /// FD settings running from closure to the last output time.
    pub fn fd_config(&self) -> CliResult<FdConfig> {
        let end = self.leak.closure_time + self.outputs.t_grid.last().copied().unwrap_or(0.0);
        let cfg = FdConfig {
            dx: self.fd.dx,
            dt: self.fd.dt,
            theta: self.fd.theta,
            horizon: end,
            formulation: self.fd.formulation,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses a scenario, or the `config` embedded in a run manifest.
pub fn parse(text: &str) -> CliResult<ScenarioFile> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    let value = match value.get("config") {
        Some(inner) if value.get("input_sha256").is_some() => inner.clone(),
        _ => value,
    };
    let file: ScenarioFile = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("`{path}`: {}", e.into_inner()))
    })?;
    file.series
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    Ok(file)
}

pub fn load(path: &Path) -> CliResult<(ScenarioFile, String)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok((parse(&text)?, text))
}

/// The bundled reference scenario.
pub fn bundled() -> ScenarioFile {
    parse(crate::BUNDLED_SCENARIO).expect("bundled scenario parses")
}
