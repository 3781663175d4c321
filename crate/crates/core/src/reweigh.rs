//! Loss reweighing for foreground pixels.
//!
//! The same inverted-cosine ramp
//!
//! ```text
//! w(x, m, n) = (m - 1) / 2 · (1 + cos(x / n · π + π)) + 1
//! ```
//!
//! drives both the progressive schedule (`x` = training step, `n` = total
//! steps) and the depth factor (`x` = first-hit depth, `n` = max depth).
//! Per-pixel loss weights are the product of the two on foreground pixels
//! and exactly 1 elsewhere.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::label::SemanticLabel;
use crate::pixmap::PixelMap;

/// `x` is clamped to `[0, n]`.
pub fn cosine_weight(x: f64, m: f64, n: f64) -> Result<f64> {
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::config(format!("ramp length must be positive, got {n}")));
    }
    if !m.is_finite() || x.is_nan() {
        return Err(Error::config(format!("ramp inputs must be finite, got x={x} m={m}")));
    }
    let x = x.clamp(0.0, n);
    Ok((m - 1.0) / 2.0 * (1.0 + (x / n * PI + PI).cos()) + 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReweighConfig {
    max_weight: f64,
    total_steps: u64,
    max_depth: f64,
    foreground: BTreeSet<SemanticLabel>,
}

impl ReweighConfig {
    pub fn new(
        max_weight: f64,
        total_steps: u64,
        max_depth: f64,
        foreground: impl IntoIterator<Item = SemanticLabel>,
    ) -> Result<Self> {
        let foreground: BTreeSet<_> = foreground.into_iter().collect();
        if !(max_weight.is_finite() && max_weight >= 1.0) {
            return Err(Error::config(format!("max weight must be >= 1, got {max_weight}")));
        }
        if total_steps == 0 {
            return Err(Error::config("total steps must be >= 1"));
        }
        if !(max_depth.is_finite() && max_depth > 0.0) {
            return Err(Error::config(format!("max depth must be positive, got {max_depth}")));
        }
        if foreground.is_empty() || foreground.contains(&SemanticLabel::FREE) {
            return Err(Error::config("foreground classes must be nonempty and exclude FREE"));
        }
        Ok(Self {
            max_weight,
            total_steps,
            max_depth,
            foreground,
        })
    }

    /// m = 2, 50 m depth cap, the ten object classes as foreground.
    pub fn with_total_steps(total_steps: u64) -> Result<Self> {
        Self::new(2.0, total_steps, 50.0, SemanticLabel::object_classes())
    }

    pub fn max_weight(&self) -> f64 {
        self.max_weight
    }

    pub fn total_steps(&self) -> u64 {
        self.total_steps
    }

    pub fn max_depth(&self) -> f64 {
        self.max_depth
    }

    pub fn foreground(&self) -> &BTreeSet<SemanticLabel> {
        &self.foreground
    }

    pub fn is_foreground(&self, label: SemanticLabel) -> bool {
        self.foreground.contains(&label)
    }
}

pub fn progressive_weight(step: u64, config: &ReweighConfig) -> f64 {
    cosine_weight(step as f64, config.max_weight, config.total_steps as f64).expect("validated config")
}

pub fn depth_weight(depth_m: f64, config: &ReweighConfig) -> f64 {
    cosine_weight(depth_m.min(config.max_depth), config.max_weight, config.max_depth).expect("validated config")
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightMap {
    step_fraction: f32,
    values: PixelMap<f32>,
}

impl WeightMap {
    pub fn new(step_fraction: f32, values: PixelMap<f32>) -> Result<Self> {
        if values.data().iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::config("weights must be finite and nonnegative"));
        }
        Ok(Self { step_fraction, values })
    }

    pub fn step_fraction(&self) -> f32 {
        self.step_fraction
    }

    pub fn values(&self) -> &PixelMap<f32> {
        &self.values
    }

    pub fn height(&self) -> usize {
        self.values.height()
    }

    pub fn width(&self) -> usize {
        self.values.width()
    }
}

fn step_fraction(step: u64, config: &ReweighConfig) -> f32 {
    (step.min(config.total_steps) as f64 / config.total_steps as f64) as f32
}

fn check_dims(semantic: &PixelMap<SemanticLabel>, depth_m: &PixelMap<f64>) -> Result<()> {
    if semantic.dims() != depth_m.dims() {
        return Err(Error::dims("weight map inputs", semantic.dims(), depth_m.dims()));
    }
    Ok(())
}

/// Product of the progressive and depth factors on foreground pixels, 1 on
/// background.
pub fn build_weight_map(
    semantic: &PixelMap<SemanticLabel>,
    depth_m: &PixelMap<f64>,
    step: u64,
    config: &ReweighConfig,
) -> Result<WeightMap> {
    check_dims(semantic, depth_m)?;
    let progressive = progressive_weight(step, config);
    let values = semantic
        .data()
        .iter()
        .zip(depth_m.data())
        .map(|(&label, &depth)| {
            if config.is_foreground(label) {
                (progressive * depth_weight(depth, config)) as f32
            } else {
                1.0
            }
        })
        .collect();
    WeightMap::new(
        step_fraction(step, config),
        PixelMap::from_vec(semantic.height(), semantic.width(), values)?,
    )
}

/// The progressive-only and depth-only maps whose product is
/// [`build_weight_map`].
pub fn build_factor_maps(
    semantic: &PixelMap<SemanticLabel>,
    depth_m: &PixelMap<f64>,
    step: u64,
    config: &ReweighConfig,
) -> Result<(WeightMap, WeightMap)> {
    check_dims(semantic, depth_m)?;
    let progressive = progressive_weight(step, config) as f32;
    let frac = step_fraction(step, config);
    let fg = |l: &SemanticLabel| config.is_foreground(*l);
    let prog = semantic.map(|l| if fg(l) { progressive } else { 1.0 });
    let depth = PixelMap::from_fn(semantic.height(), semantic.width(), |v, u| {
        if fg(semantic.get(v, u)) {
            depth_weight(*depth_m.get(v, u), config) as f32
        } else {
            1.0
        }
    });
    Ok((WeightMap::new(frac, prog)?, WeightMap::new(frac, depth)?))
}

/// Block-mean pooling by an integer factor that divides both dimensions.
pub fn downsample_weight_map(map: &WeightMap, factor: usize) -> Result<WeightMap> {
    let (h, w) = map.values.dims();
    if factor == 0 || h % factor != 0 || w % factor != 0 {
        return Err(Error::config(format!(
            "pooling factor {factor} must divide the map size {w}x{h}"
        )));
    }
    if factor == 1 {
        return Ok(map.clone());
    }
    let area = (factor * factor) as f64;
    let pooled = PixelMap::from_fn(h / factor, w / factor, |v, u| {
        let mut sum = 0.0f64;
        for dv in 0..factor {
            for du in 0..factor {
                sum += *map.values.get(v * factor + dv, u * factor + du) as f64;
            }
        }
        (sum / area) as f32
    });
    WeightMap::new(map.step_fraction, pooled)
}
