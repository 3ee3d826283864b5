use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use noisesynth::camera::{CameraConfig, CameraNoiseKind};
use noisesynth::io::{GenerateOptions, SensorSelection};
use noisesynth::radar::RadarNoiseConfig;
use noisesynth::{NoiseLevel, SensorModel};
use serde::{Deserialize, Serialize};

/// Everything a run needs. Loaded from a TOML file, then overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub sensors: SensorSelection,
    pub kinds: Vec<CameraNoiseKind>,
    /// Level strings as accepted by `--levels` (e.g. `"30%"`, `"0.3"`).
    pub levels: Vec<String>,
    pub seed: u64,
    pub workers: usize,
    pub model: SensorModel,
    pub radar: RadarNoiseConfig,
    pub camera: CameraConfig,
    /// JSON object mapping input-relative PCD paths to `[vx, vy]`.
    pub ego_metadata: Option<PathBuf>,
    /// Text file with one input-relative path per line to process.
    pub include: Option<PathBuf>,
    pub resume: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: None,
            output: None,
            sensors: SensorSelection::default(),
            kinds: CameraNoiseKind::ALL.to_vec(),
            levels: (0..=10).map(|c| format!("{}%", c * 10)).collect(),
            seed: 0,
            workers: 0,
            model: SensorModel::default(),
            radar: RadarNoiseConfig::default(),
            camera: CameraConfig::default(),
            ego_metadata: None,
            include: None,
            resume: false,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn parsed_levels(&self) -> anyhow::Result<Vec<NoiseLevel>> {
        if self.levels.is_empty() {
            bail!("the level grid is empty");
        }
        self.levels.iter().map(|s| parse_level(s)).collect()
    }

    pub fn input(&self) -> anyhow::Result<&Path> {
        self.input.as_deref().context("--input is required")
    }

    pub fn output(&self) -> anyhow::Result<&Path> {
        self.output.as_deref().context("--output is required")
    }

    /// Validates the configuration and builds generation options.
    pub fn generate_options(&self, dry_run: bool) -> anyhow::Result<GenerateOptions> {
        self.model.validate()?;
        if !self.radar.ghost_states.is_valid() {
            bail!("ghost state codes must be distinct");
        }
        if self.kinds.is_empty() && self.sensors.camera {
            bail!("no camera noise kinds selected");
        }
        let ego_metadata = match &self.ego_metadata {
            Some(p) => load_ego_metadata(p)?,
            None => BTreeMap::new(),
        };
        let include = match &self.include {
            Some(p) => Some(load_include(p)?),
            None => None,
        };
        Ok(GenerateOptions {
            levels: self.parsed_levels()?,
            kinds: self.kinds.clone(),
            sensors: self.sensors,
            master_seed: self.seed,
            workers: self.workers,
            model: self.model.clone(),
            radar: self.radar.clone(),
            camera: self.camera.clone(),
            ego_metadata,
            include,
            dry_run,
            resume: self.resume,
            write_manifest: true,
        })
    }
}

fn load_ego_metadata(path: &Path) -> anyhow::Result<BTreeMap<String, [f64; 2]>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading ego metadata {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing ego metadata {}", path.display()))
}

fn load_include(path: &Path) -> anyhow::Result<BTreeSet<String>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading include list {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

/// Parses one level. `30%` is a percentage; a bare number is a fraction and
/// must not exceed 1 (write `150%` for levels above the nominal maximum).
pub fn parse_level(s: &str) -> anyhow::Result<NoiseLevel> {
    let s = s.trim();
    if let Some(p) = s.strip_suffix('%') {
        let v: f64 = p
            .trim()
            .parse()
            .with_context(|| format!("bad level `{s}`"))?;
        return Ok(NoiseLevel::from_percent(v)?);
    }
    let v: f64 = s.parse().with_context(|| format!("bad level `{s}`"))?;
    if v > 1.0 {
        bail!("level `{s}` is ambiguous: use `{s}%` for a percentage (bare values are fractions in 0..=1)");
    }
    Ok(NoiseLevel::new(v)?)
}

pub fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn level_units() {
        assert_eq!(parse_level("30%").unwrap(), NoiseLevel::new(0.3).unwrap());
        assert_eq!(parse_level("0.3").unwrap(), NoiseLevel::new(0.3).unwrap());
        assert_eq!(parse_level("1").unwrap(), NoiseLevel::MAX);
        assert_eq!(parse_level("150%").unwrap(), NoiseLevel::new(1.5).unwrap());
        assert!(parse_level("30").is_err());
        assert!(parse_level("-5%").is_err());
        assert!(parse_level("abc").is_err());
    }

    #[test]
    fn default_grid_has_eleven_classes() {
        let levels = RunConfig::default().parsed_levels().unwrap();
        assert_eq!(levels, NoiseLevel::default_grid());
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig {
            seed: 42,
            kinds: vec![CameraNoiseKind::Blur],
            ..Default::default()
        };
        cfg.radar.disable_w_noise = true;
        let text = toml::to_string(&cfg).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn partial_toml_uses_defaults() {
        let cfg: RunConfig =
            toml::from_str("seed = 7\nlevels = [\"0%\", \"100%\"]\n[model]\nghost_count_max = 2\n")
                .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.model.ghost_count_max, 2);
        assert_eq!(cfg.model.r_min, 0.2);
        assert_eq!(cfg.kinds.len(), 4);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<RunConfig>("sed = 7\n").is_err());
    }
}
