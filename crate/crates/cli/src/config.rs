//! Optional JSON defaults. Precedence is flag, then config file, then the
//! built-in default.

use std::path::Path;

use anyhow::Context;
use serde::Deserialize;

use crate::args::Size;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub threads: Option<usize>,
    pub synth: SynthConfig,
    pub build: BuildConfig,
    pub composite: ViewConfig,
    pub weights: WeightsConfig,
    pub cbgs: CbgsConfig,
    pub gradcheck: GradcheckConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildConfig {
    pub planes: Option<usize>,
    pub dmin: Option<f64>,
    pub dmax: Option<f64>,
    pub size: Option<Size>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ViewConfig {
    pub view: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsConfig {
    pub view: Option<usize>,
    pub total_steps: Option<u64>,
    pub max_weight: Option<f64>,
    pub max_depth: Option<f64>,
    pub downsample: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CbgsConfig {
    pub target_len: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradcheckConfig {
    pub seed: Option<u64>,
    pub cases: Option<usize>,
    pub tol: Option<f64>,
    pub h: Option<f64>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let bytes = std::fs::read(path).with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_slice(&bytes).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// First of flag, config value, default.
pub fn pick<T>(flag: Option<T>, config: Option<T>, default: T) -> T {
    flag.or(config).unwrap_or(default)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence() {
        assert_eq!(pick(Some(1), Some(2), 3), 1);
        assert_eq!(pick(None, Some(2), 3), 2);
        assert_eq!(pick(None, None, 3), 3);
    }

    #[test]
    fn parses_sections() {
        let cfg: FileConfig =
            serde_json::from_str(r#"{"threads": 2, "build": {"planes": 64, "size": "400x224"}}"#).unwrap();
        assert_eq!(cfg.threads, Some(2));
        assert_eq!(cfg.build.planes, Some(64));
        assert_eq!(
            cfg.build.size,
            Some(Size {
                width: 400,
                height: 224
            })
        );
        assert!(serde_json::from_str::<FileConfig>(r#"{"build": {"plane": 64}}"#).is_err());
        assert!(serde_json::from_str::<FileConfig>(r#"{"build": {"size": "wide"}}"#).is_err());
    }
}
