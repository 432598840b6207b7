//! JSON scenario files.
//!
//! ```json
//! {
//!   "grid": { "T": 1.0, "N": 10 },
//!   "barriers": {
//!     "lower": { "kind": "constant", "params": [-0.4] },
//!     "upper": { "kind": "constant", "params": [0.4] }
//!   },
//!   "driver": { "kind": "affine", "params": [0.0, 0.025, 0.025, -0.05], "L1": 0.05, "L2": 0.05 },
//!   "terminal": { "kind": "clamp", "params": [-0.4, 0.4], "scale": 1.0 },
//!   "picard": { "tol": 1e-9, "max_iter": 50 },
//!   "seed": 42,
//!   "outputs": "out"
//! }
//! ```
//!
//! Unknown fields are rejected. Command-specific sections (`esm_check`,
//! `depend`, `local_time`, `converge`) are optional and have defaults.

use std::path::{Path, PathBuf};

use anyhow::Context;
use rbsde_core::solver::{DriverSpec, KProjection, PicardConfig, ScenarioSpec, TerminalSpec};
use rbsde_core::{BarrierPair, BarrierSpec, TimeGrid};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(rename = "N")]
    pub steps: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierConfig {
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarriersConfig {
    pub lower: BarrierConfig,
    pub upper: BarrierConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverConfig {
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(rename = "L1")]
    pub l1: Option<f64>,
    #[serde(rename = "L2")]
    pub l2: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerminalConfig {
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionConfig {
    Predictable,
    Optional,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardSection {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub bdg_constant: Option<f64>,
    pub projection: Option<ProjectionConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EsmCheckConfig {
    pub paths: usize,
    /// Zigzag step size as a fraction of the local barrier gap.
    pub amplitude: f64,
    /// Perturbation size for the second path of each pair, as a fraction of the gap.
    pub noise: f64,
}

impl Default for EsmCheckConfig {
    fn default() -> Self {
        Self { paths: 1000, amplitude: 0.6, noise: 0.1 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DependConfig {
    pub eps: Vec<f64>,
    /// Direction `delta` of the terminal perturbation; defaults to `-xi`.
    pub perturbation: Option<TerminalConfig>,
}

impl Default for DependConfig {
    fn default() -> Self {
        Self { eps: vec![0.2, 0.1, 0.05], perturbation: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LocalTimeConfig {
    pub meshes: Vec<usize>,
    pub paths: usize,
    /// Boundary width as a multiple of `sqrt(dt)`.
    pub eps_factor: f64,
}

impl Default for LocalTimeConfig {
    fn default() -> Self {
        Self { meshes: vec![256, 1024, 4096], paths: 100, eps_factor: 0.5 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConvergeConfig {
    pub meshes: Vec<usize>,
}

impl Default for ConvergeConfig {
    fn default() -> Self {
        Self { meshes: vec![6, 8, 10, 12] }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub grid: GridConfig,
    pub barriers: BarriersConfig,
    pub driver: DriverConfig,
    pub terminal: TerminalConfig,
    #[serde(default)]
    pub picard: PicardSection,
    #[serde(default)]
    pub seed: u64,
    /// Output directory.
    pub outputs: Option<PathBuf>,
    #[serde(default)]
    pub esm_check: EsmCheckConfig,
    #[serde(default)]
    pub depend: DependConfig,
    #[serde(default)]
    pub local_time: LocalTimeConfig,
    #[serde(default)]
    pub converge: ConvergeConfig,
}

/// A rejected scenario file or flag; maps to the usage exit code.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ValidationError(pub String);

impl ValidationError {
    pub fn from_core(context: &str, e: rbsde_core::Error) -> Self {
        Self(format!("{context}: {e}"))
    }
}

pub fn terminal_spec(t: &TerminalConfig) -> Result<TerminalSpec, ValidationError> {
    TerminalSpec::from_parts(&t.kind, &t.params, t.scale).map_err(|e| ValidationError::from_core("terminal", e))
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ValidationError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| ValidationError(format!("config: {e}")))?;
        cfg.barrier_pair()?;
        cfg.picard_config()?;
        Ok(cfg)
    }

    /// Reads and validates a scenario file. IO failures come back as plain
    /// errors, malformed content as [`ValidationError`].
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(Self::from_json(&text).map_err(|e| ValidationError(format!("{}: {}", path.display(), e.0)))?)
    }

    pub fn scenario_spec(&self) -> Result<ScenarioSpec, ValidationError> {
        let b = |c: &BarrierConfig, side: &str| {
            BarrierSpec::from_parts(&c.kind, &c.params).map_err(|e| ValidationError::from_core(side, e))
        };
        let d = &self.driver;
        Ok(ScenarioSpec {
            horizon: self.grid.horizon,
            lower: b(&self.barriers.lower, "barriers.lower")?,
            upper: b(&self.barriers.upper, "barriers.upper")?,
            driver: DriverSpec::from_parts(&d.kind, &d.params, d.l1, d.l2)
                .map_err(|e| ValidationError::from_core("driver", e))?,
            terminal: terminal_spec(&self.terminal)?,
        })
    }

    /// Barriers on the configured grid. Path-sampling commands need only
    /// this, so load-time validation stops here and leaves the tree depth
    /// cap to the tree-based commands.
    pub fn barrier_pair(&self) -> Result<BarrierPair, ValidationError> {
        let spec = self.scenario_spec()?;
        let grid =
            TimeGrid::uniform(spec.horizon, self.grid.steps).map_err(|e| ValidationError::from_core("grid", e))?;
        BarrierPair::from_specs(&spec.lower, &spec.upper, grid).map_err(|e| ValidationError::from_core("barriers", e))
    }

    /// The scenario on the configured grid.
    pub fn scenario(&self) -> Result<rbsde_core::solver::Scenario, ValidationError> {
        self.scenario_spec()?.build(self.grid.steps).map_err(|e| ValidationError::from_core("scenario", e))
    }

    pub fn picard_config(&self) -> Result<PicardConfig, ValidationError> {
        let p = &self.picard;
        let d = PicardConfig::default();
        let cfg = PicardConfig {
            alpha: p.alpha.unwrap_or(d.alpha),
            beta: p.beta.unwrap_or(d.beta),
            gamma1: p.gamma1.unwrap_or(d.gamma1),
            gamma2: p.gamma2.unwrap_or(d.gamma2),
            tol: p.tol.unwrap_or(d.tol),
            max_iter: p.max_iter.unwrap_or(d.max_iter),
            bdg_constant: p.bdg_constant.unwrap_or(d.bdg_constant),
            projection: match p.projection {
                Some(ProjectionConfig::Optional) => KProjection::Optional,
                Some(ProjectionConfig::Predictable) | None => KProjection::Predictable,
            },
        };
        cfg.validate().map_err(|e| ValidationError::from_core("picard", e))?;
        Ok(cfg)
    }
}
