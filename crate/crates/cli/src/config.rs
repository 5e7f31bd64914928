// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use harnack_core::{CampanatoMode, CampanatoParams, CgOptions, Expr, GraphAxis, ObstacleOptions, PlanarCondition, RadiusMethod};
use serde::Deserialize;
use serde_json::Value;

/// One run, selected by the `"command"` key.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum RunConfig {
    SolveWeighted(SolveWeightedConfig),
    Obstacle(ObstacleConfig),
    Harnack(HarnackConfig),
    AnalyticScan(AnalyticScanConfig),
    MajorantOde(MajorantOdeConfig),
}

impl RunConfig {
    pub fn name(&self) -> &'static str {
        match self {
            RunConfig::SolveWeighted(_) => "solve_weighted",
            RunConfig::Obstacle(_) => "obstacle",
            RunConfig::Harnack(_) => "harnack",
            RunConfig::AnalyticScan(_) => "analytic_scan",
            RunConfig::MajorantOde(_) => "majorant_ode",
        }
    }
}

/// Parses a config document. The optional top-level `"out"` key names the output directory.
pub fn parse(text: &str) -> Result<(RunConfig, Option<PathBuf>)> {
    let mut doc: Value = serde_json::from_str(text).context("config is not valid JSON")?;
    let Some(map) = doc.as_object_mut() else {
        bail!("config must be a JSON object");
    };
    let out = match map.remove("out") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(other) => bail!("\"out\" must be a string, got {other}"),
    };
    let cfg: RunConfig = serde_json::from_value(doc).context("invalid config")?;
    cfg.validate()?;
    Ok((cfg, out))
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub jacobi: bool,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = CgOptions::default();
        Self { tol: d.tol, max_iter: d.max_iter, jacobi: d.jacobi }
    }
}

impl SolverSpec {
    pub fn options(&self) -> CgOptions {
        CgOptions { tol: self.tol, max_iter: self.max_iter, jacobi: self.jacobi }
    }
}

fn identity() -> String {
    "identity".into()
}

fn flat() -> String {
    "flat".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveWeightedConfig {
    pub grid: GridSpec,
    /// Weight exponent of `x_n^s`.
    pub s: f64,
    #[serde(default = "identity")]
    pub coefficients: String,
    pub boundary: String,
    /// Reference solution for error reporting.
    #[serde(default)]
    pub exact: Option<String>,
    #[serde(default)]
    pub planar: PlanarCondition,
    #[serde(default)]
    pub solver: SolverSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupSpec {
    pub x0: [f64; 2],
    pub radii: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleConfig {
    pub grid: GridSpec,
    #[serde(default = "identity")]
    pub coefficients: String,
    pub boundary: String,
    #[serde(default = "default_axis")]
    pub axis: GraphAxis,
    #[serde(default)]
    pub psor: ObstacleOptions,
    #[serde(default)]
    pub blowup: Vec<BlowupSpec>,
}

fn default_axis() -> GraphAxis {
    GraphAxis::Xn
}

fn default_floor() -> f64 {
    1e-6
}

fn default_campanato() -> CampanatoParams {
    CampanatoParams::new(0.5, 0.5, 3, CampanatoMode::L2fit)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnackConfig {
    pub grid: GridSpec,
    #[serde(default = "flat")]
    pub curve: String,
    /// Boundary data of the two solutions in the original coordinates. Both vanish on the graph.
    pub u1: String,
    pub u2: String,
    #[serde(default = "default_floor")]
    pub floor_tol: f64,
    /// Reference for `u1 / u2`, in the original coordinates.
    #[serde(default)]
    pub expected_ratio: Option<String>,
    #[serde(default = "default_campanato")]
    pub campanato: CampanatoParams,
    #[serde(default)]
    pub solver: SolverSpec,
}

fn default_kmax() -> usize {
    6
}

fn default_window() -> f64 {
    0.3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticScanConfig {
    pub grid: GridSpec,
    pub boundary: String,
    #[serde(default = "default_axis")]
    pub axis: GraphAxis,
    #[serde(default)]
    pub psor: ObstacleOptions,
    #[serde(default = "default_kmax")]
    pub kmax: usize,
    #[serde(default = "default_window")]
    pub window: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    Float,
    Exact,
}

fn default_order() -> usize {
    harnack_core::majorant::DEFAULT_ORDER
}

fn default_arithmetic() -> Arithmetic {
    Arithmetic::Float
}

fn default_method() -> RadiusMethod {
    RadiusMethod::Root
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MajorantOdeConfig {
    /// Right-hand side of `Ω'`.
    pub m: Expr,
    /// Right-hand side of `Π'`.
    pub n: Expr,
    pub pi0: f64,
    pub omega0: f64,
    #[serde(default = "default_order")]
    pub order: usize,
    #[serde(default = "default_arithmetic")]
    pub arithmetic: Arithmetic,
    #[serde(default = "default_method")]
    pub radius_method: RadiusMethod,
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        let grid = |g: &GridSpec| -> Result<()> {
            if g.nx < 2 || g.ny < 2 || g.nx > 4096 || g.ny > 4096 {
                bail!("grid sizes must lie in [2, 4096], got {} x {}", g.nx, g.ny);
            }
            Ok(())
        };
        let solver = |s: &SolverSpec| -> Result<()> {
            if !(s.tol > 0.0) {
                bail!("solver tolerance must be positive");
            }
            Ok(())
        };
        match self {
            RunConfig::SolveWeighted(c) => {
                grid(&c.grid)?;
                solver(&c.solver)?;
                if !(c.s >= 0.0) {
                    bail!("weight exponent s must be >= 0");
                }
            }
            RunConfig::Obstacle(c) => {
                grid(&c.grid)?;
                if c.blowup.iter().any(|b| b.radii.is_empty() || b.radii.iter().any(|r| !(*r > 0.0))) {
                    bail!("blow-up radii must be a nonempty list of positive numbers");
                }
            }
            RunConfig::Harnack(c) => {
                grid(&c.grid)?;
                solver(&c.solver)?;
                if !(c.floor_tol >= 0.0) {
                    bail!("floor_tol must be >= 0");
                }
            }
            RunConfig::AnalyticScan(c) => {
                grid(&c.grid)?;
                if c.kmax < 1 || c.kmax > 40 || !(c.window > 0.0 && c.window <= 1.0) {
                    bail!("need 1 <= kmax <= 40 and window in (0, 1]");
                }
            }
            RunConfig::MajorantOde(c) => {
                if c.order < 1 || c.order > 200 {
                    bail!("order must lie in [1, 200]");
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let ok = r#"{"command": "solve_weighted", "grid": {"nx": 8, "ny": 4}, "s": 2, "boundary": "x1"}"#;
        assert!(parse(ok).is_ok());
        let bad = r#"{"command": "solve_weighted", "grid": {"nx": 8, "ny": 4}, "s": 2, "boundary": "x1", "typo": 1}"#;
        assert!(parse(bad).is_err());
        let nested = r#"{"command": "solve_weighted", "grid": {"nx": 8, "ny": 4, "nz": 2}, "s": 2, "boundary": "x1"}"#;
        assert!(parse(nested).is_err());
        assert!(parse(r#"{"command": "teleport"}"#).is_err());
    }

    #[test]
    fn out_key_is_split_off() {
        let (cfg, out) = parse(r#"{"command": "majorant_ode", "m": "omega", "n": {"const": 0}, "pi0": 0, "omega0": 1, "out": "runs/a"}"#).unwrap();
        assert_eq!(cfg.name(), "majorant_ode");
        assert_eq!(out, Some(PathBuf::from("runs/a")));
    }
}
