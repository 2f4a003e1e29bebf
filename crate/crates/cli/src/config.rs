//! TOML run configuration shared by `gen` and `convert`.

use std::path::Path;

use anyhow::{Context, Result};
use groundplane::datagen::{CameraConfig, SceneConfig};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Number of scenes (images) to generate.
    pub images: usize,
    /// Master seed; scene `i` uses a seed derived from it.
    pub seed: u64,
    /// Extra prediction files at these jitter levels (px), one per value.
    pub sigma_sweep: Vec<f64>,
    pub scene: SceneConfig,
    pub camera: CameraConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            images: 1,
            seed: 0,
            sigma_sweep: Vec::new(),
            scene: SceneConfig::default(),
            camera: CameraConfig::default(),
        }
    }
}

impl RunConfig {
    /// Reads `path`, or returns the defaults when no path is given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        let cfg: RunConfig =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        cfg.scene.validate()?;
        cfg.camera.validate()?;
        if cfg
            .sigma_sweep
            .iter()
            .any(|s| !(s.is_finite() && *s >= 0.0))
        {
            anyhow::bail!("sigma_sweep values must be non-negative");
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_tables_fall_back_to_defaults() {
        let cfg: RunConfig = toml::from_str("images = 3\n[camera]\nheight_m = 12.0\n").unwrap();
        assert_eq!(cfg.images, 3);
        assert_eq!(cfg.camera.height_m, 12.0);
        assert_eq!(cfg.camera.pitch_deg, CameraConfig::default().pitch_deg);
        assert_eq!(cfg.scene, SceneConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("image = 3\n").is_err());
        assert!(toml::from_str::<RunConfig>("[scene]\nvehicles = 3\n").is_err());
    }
}
