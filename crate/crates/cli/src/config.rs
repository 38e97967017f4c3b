//! Run configuration: a JSON file whose values are overridden by flags.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use depthkit::eval::ScaleMode;
use depthkit::inpaint::InpaintConfig;
use depthkit::synth::SynthConfig;
use depthkit::train::{LossWeights, TrainConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub threads: Option<usize>,
    pub deterministic: bool,
    pub depth_divisor: f64,
    pub eval: EvalSettings,
    pub synth: SynthSettings,
    pub render: RenderSettings,
    pub train: TrainSettings,
    pub inpaint: InpaintConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            threads: None,
            deterministic: false,
            depth_divisor: depthkit::depth_io::DEFAULT_DEPTH_DIVISOR,
            eval: EvalSettings::default(),
            synth: SynthSettings::default(),
            render: RenderSettings::default(),
            train: TrainSettings::default(),
            inpaint: InpaintConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSettings {
    pub scale_mode: ScaleMode,
    /// Frame ids (numeric stems) to leave out.
    pub exclude: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSettings {
    pub cameras: usize,
    pub width: usize,
    pub height: usize,
    pub focal: f64,
    pub distance: f64,
    pub spread: f64,
    pub samples: usize,
    pub grid: SynthConfig,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self {
            cameras: 4,
            width: 32,
            height: 32,
            focal: 64.0,
            distance: 3.5,
            spread: 0.2,
            samples: 128,
            grid: SynthConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderSettings {
    pub samples: usize,
    pub jitter: bool,
}

impl Default for RenderSettings {
    fn default() -> Self {
        Self {
            samples: 128,
            jitter: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainSettings {
    pub config: TrainConfig,
    pub weights: LossWeights,
    pub resolution: [usize; 3],
    pub bounds_min: [f64; 3],
    pub bounds_max: [f64; 3],
    pub init_sigma: f64,
    pub init_color: f64,
}

impl Default for TrainSettings {
    fn default() -> Self {
        let grid = SynthConfig::default();
        Self {
            config: TrainConfig::default(),
            weights: LossWeights::default(),
            resolution: grid.resolution,
            bounds_min: grid.bounds_min,
            bounds_max: grid.bounds_max,
            init_sigma: 0.5,
            init_color: 0.5,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
            }
        }
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub args: Vec<String>,
    pub seed: u64,
    pub threads: usize,
    pub deterministic: bool,
    pub config: &'a RunConfig,
    pub versions: Versions,
    pub notes: Vec<&'static str>,
}

#[derive(Debug, Serialize)]
pub struct Versions {
    pub depthkit: &'static str,
    pub format_grid: u32,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            depthkit: env!("CARGO_PKG_VERSION"),
            format_grid: depthkit::field::GRID_VERSION,
        }
    }
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}
