//! JSON run configurations. Every document carries `"schema": 1`; unknown
//! fields are rejected.

use std::path::Path;

use cloak_core::geometry::{CloakParams, Point, Scenario};
use cloak_core::halfspace::{HalfspaceParams, LineTestFunction};
use cloak_core::modal::{BoundaryCoeffs, SourceCoeffs};
use cloak_core::weak_limit::{Component, QuadSettings, RadialTestFunction};
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

fn default_truncation_tol() -> f64 {
    1e-12
}

fn default_component() -> Component {
    Component::Electric
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub omega: f64,
    pub eps0: f64,
    pub mu0: f64,
    pub r1: f64,
}

impl ScenarioSpec {
    pub fn build(&self) -> Result<Scenario, CliError> {
        Ok(Scenario::new(self.omega, self.eps0, self.mu0, self.r1)?)
    }

    pub fn with_rho(&self, rho: f64) -> Result<CloakParams, CliError> {
        Ok(CloakParams::new(self.build()?, rho)?)
    }
}

/// `ρ`-sweep of the normal-field pairing against its predicted limit.
/// Boundary data are zero by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeConfig {
    pub schema: u32,
    pub scenario_id: String,
    pub scenario: ScenarioSpec,
    pub rhos: Vec<f64>,
    pub source: SourceCoeffs,
    pub test_function: RadialTestFunction,
    #[serde(default = "default_component")]
    pub component: Component,
    #[serde(default)]
    pub quadrature: QuadSettings,
    /// Fixed truncation order; chosen from `truncation_tol` when absent.
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default = "default_truncation_tol")]
    pub truncation_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldSpace {
    /// Regularized cloak in physical coordinates.
    Physical,
    /// Virtual annulus `ρ ≤ |y| ≤ 2`.
    Virtual,
    /// Push-forward of the background field by the singular map.
    Ideal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSpec {
    pub from: [f64; 3],
    pub to: [f64; 3],
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsConfig {
    pub schema: u32,
    pub scenario_id: String,
    pub scenario: ScenarioSpec,
    pub rho: f64,
    #[serde(default)]
    pub source: SourceCoeffs,
    #[serde(default)]
    pub boundary: BoundaryCoeffs,
    #[serde(default = "default_space")]
    pub space: FieldSpace,
    #[serde(default)]
    pub points: Vec<[f64; 3]>,
    #[serde(default)]
    pub line: Option<LineSpec>,
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default = "default_truncation_tol")]
    pub truncation_tol: f64,
}

fn default_space() -> FieldSpace {
    FieldSpace::Physical
}

impl FieldsConfig {
    /// Explicit points followed by the sampled line, endpoints included.
    pub fn sample_points(&self) -> Result<Vec<Point>, CliError> {
        let mut out: Vec<Point> = self.points.iter().map(|p| Point::new(p[0], p[1], p[2])).collect();
        if let Some(line) = &self.line {
            if line.count < 2 {
                return Err(CliError::Config("line.count must be at least 2".into()));
            }
            let (a, b) = (Point::from(line.from), Point::from(line.to));
            out.extend((0..line.count).map(|k| a + (b - a) * (k as f64 / (line.count - 1) as f64)));
        }
        if out.is_empty() {
            return Err(CliError::Config("no sample points".into()));
        }
        Ok(out)
    }
}

fn default_hin() -> [f64; 2] {
    [1.0, 0.0]
}

fn default_halfspace_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceConfig {
    pub schema: u32,
    pub scenario_id: String,
    pub omega: f64,
    pub kz: f64,
    #[serde(default = "default_hin")]
    pub hin: [f64; 2],
    pub rhos: Vec<f64>,
    pub test_function: LineTestFunction,
    #[serde(default = "default_halfspace_tol")]
    pub tol: f64,
}

impl HalfspaceConfig {
    /// Parameters at the first `ρ` of the sweep.
    pub fn base(&self) -> Result<HalfspaceParams, CliError> {
        let rho = *self.rhos.first().ok_or_else(|| CliError::Config("empty rho list".into()))?;
        Ok(HalfspaceParams::new(self.omega, self.kz, rho, Complex64::new(self.hin[0], self.hin[1]))?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecfunConfig {
    #[serde(default = "schema")]
    pub schema: u32,
    #[serde(default = "specfun_id")]
    pub scenario_id: String,
    #[serde(default = "sf_n_max")]
    pub n_max: usize,
    #[serde(default = "sf_t_min")]
    pub t_min: f64,
    #[serde(default = "sf_t_max")]
    pub t_max: f64,
    #[serde(default = "sf_points")]
    pub points: usize,
    #[serde(default = "sf_tol")]
    pub tol: f64,
}

fn schema() -> u32 {
    SCHEMA_VERSION
}
fn specfun_id() -> String {
    "specfun-default".into()
}
fn sf_n_max() -> usize {
    60
}
fn sf_t_min() -> f64 {
    0.1
}
fn sf_t_max() -> f64 {
    50.0
}
fn sf_points() -> usize {
    500
}
fn sf_tol() -> f64 {
    1e-11
}

impl Default for SpecfunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields default")
    }
}

/// Any config document, tagged by the command that consumes it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", content = "config", rename_all = "kebab-case")]
pub enum RunConfig {
    Converge(ConvergeConfig),
    Fields(FieldsConfig),
    Halfspace(HalfspaceConfig),
    CheckSpecfun(SpecfunConfig),
}

impl RunConfig {
    pub fn command(&self) -> &'static str {
        match self {
            RunConfig::Converge(_) => "converge",
            RunConfig::Fields(_) => "fields",
            RunConfig::Halfspace(_) => "halfspace",
            RunConfig::CheckSpecfun(_) => "check-specfun",
        }
    }

    pub fn scenario_id(&self) -> &str {
        match self {
            RunConfig::Converge(c) => &c.scenario_id,
            RunConfig::Fields(c) => &c.scenario_id,
            RunConfig::Halfspace(c) => &c.scenario_id,
            RunConfig::CheckSpecfun(c) => &c.scenario_id,
        }
    }

    fn schema(&self) -> u32 {
        match self {
            RunConfig::Converge(c) => c.schema,
            RunConfig::Fields(c) => c.schema,
            RunConfig::Halfspace(c) => c.schema,
            RunConfig::CheckSpecfun(c) => c.schema,
        }
    }

    /// Replaces the tolerance the command is most sensitive to.
    pub fn override_tol(&mut self, tol: f64) {
        match self {
            RunConfig::Converge(c) => c.quadrature.tol = tol,
            RunConfig::Fields(c) => c.truncation_tol = tol,
            RunConfig::Halfspace(c) => c.tol = tol,
            RunConfig::CheckSpecfun(c) => c.tol = tol,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema() != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "unsupported schema {} (expected {SCHEMA_VERSION})",
                self.schema()
            )));
        }
        let positive = |v: f64, what: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{what} must be positive, got {v}")))
            }
        };
        match self {
            RunConfig::Converge(c) => {
                if c.rhos.is_empty() {
                    return Err(CliError::Config("empty rho list".into()));
                }
                positive(c.quadrature.tol, "quadrature.tol")?;
                positive(c.truncation_tol, "truncation_tol")?;
                if c.source.is_empty() {
                    return Err(CliError::Config("empty source table".into()));
                }
            }
            RunConfig::Fields(c) => {
                positive(c.truncation_tol, "truncation_tol")?;
                c.sample_points()?;
            }
            RunConfig::Halfspace(c) => {
                positive(c.tol, "tol")?;
                c.base()?;
                c.test_function.validate()?;
            }
            RunConfig::CheckSpecfun(c) => {
                positive(c.tol, "tol")?;
                positive(c.t_min, "t_min")?;
                if !(c.t_max > c.t_min) || c.points < 2 {
                    return Err(CliError::Config("need t_max > t_min and at least 2 points".into()));
                }
            }
        }
        Ok(())
    }
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}
