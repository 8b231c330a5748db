use std::fs;
use std::path::Path;

use boltzmann_fourier::charfn::{Interpolation, MeasureSpec};
use boltzmann_fourier::collision::QuadratureSettings;
use boltzmann_fourier::evolve::EvolveConfig;
use boltzmann_fourier::kernel::ScalarRule;
use serde::{Deserialize, Serialize};

use crate::CliError;

fn one() -> f64 {
    1.0
}
fn ten() -> f64 {
    10.0
}
fn half() -> f64 {
    0.5
}
fn default_alphas() -> Vec<f64> {
    vec![1.0, 2.0]
}
fn yes() -> bool {
    true
}
fn default_slack() -> f64 {
    0.05
}
fn default_weight_order() -> u32 {
    4
}
fn default_delta() -> f64 {
    1e-2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBlock {
    pub s: f64,
    #[serde(default = "one")]
    pub strength: f64,
    pub cutoff: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(default)]
    pub rule: ScalarRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub radius: f64,
    pub points: usize,
    #[serde(default)]
    pub interpolation: Interpolation,
    #[serde(default = "yes")]
    pub symmetry: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeBlock {
    /// `null` selects the largest admissible step.
    #[serde(default)]
    pub dt: Option<f64>,
    pub horizon: f64,
    #[serde(default = "ten")]
    pub cadence: f64,
    #[serde(default = "half")]
    pub safety: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityBlock {
    #[serde(default = "default_slack")]
    pub slack: f64,
}

impl Default for StabilityBlock {
    fn default() -> Self {
        StabilityBlock { slack: default_slack() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothingBlock {
    #[serde(default = "default_weight_order")]
    pub n: u32,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl Default for SmoothingBlock {
    fn default() -> Self {
        SmoothingBlock { n: default_weight_order(), delta: default_delta() }
    }
}

/// Run configuration read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: KernelBlock,
    pub grid: GridBlock,
    #[serde(default)]
    pub quadrature: QuadratureSettings,
    pub time: TimeBlock,
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub stability: StabilityBlock,
    #[serde(default)]
    pub smoothing: SmoothingBlock,
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        cfg.evolve().validate().map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn evolve(&self) -> EvolveConfig {
        EvolveConfig {
            s: self.kernel.s,
            strength: self.kernel.strength,
            cutoff: self.kernel.cutoff,
            schedule: self.kernel.schedule.clone(),
            radius: self.grid.radius,
            points: self.grid.points,
            dt: self.time.dt,
            horizon: self.time.horizon,
            quadrature: self.quadrature,
            rule: self.kernel.rule,
            cadence: self.time.cadence,
            safety: self.time.safety,
            alphas: self.alphas.clone(),
            interpolation: self.grid.interpolation,
            symmetry: self.grid.symmetry,
        }
    }
}

pub fn read_measure(path: &Path) -> Result<MeasureSpec, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read measure {}: {e}", path.display())))?;
    MeasureSpec::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}
