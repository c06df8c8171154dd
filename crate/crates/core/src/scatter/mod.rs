//! Scattering features built on the dual-tree transform.
//!
//! Each colour channel of an input image is resized to every configured
//! resolution and passed through two layers of modulus envelopes. First-layer
//! envelopes at every scale but the coarsest go through `ln(U + k_j)`; both
//! layers and the image itself are then smoothed down to `2^J` spacing and
//! flattened into one vector.

mod envelope;
mod layers;
mod normalize;
mod smooth;
mod upsample;

pub use envelope::{
    default_log_grid, log_transform, modulus, skewness, tune_log_param, EnvelopePlane, LogParamReport,
    ScaleLogReport,
};
pub use layers::{
    extract_features, feature_layout, first_layer_envelopes, scatter_layers, tune_log_params, Extractor, ScatterFeatureVector,
    ScatterLayers,
};
pub use normalize::{normalize_features, FeatureStats};
pub use smooth::smooth_to_invariance;
pub use upsample::upsample;

use crate::dtcwt::{DtcwtError, ORIENTATIONS};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatterError {
    #[error("cannot resize {from} pixels down to {to}")]
    Downscale { from: usize, to: usize },
    #[error("{height}x{width} input does not match any configured resolution")]
    ResolutionMismatch { height: usize, width: usize },
    #[error("expected {expected} channels, got {got}")]
    ChannelCount { expected: usize, got: usize },
    #[error("invalid scatter configuration: {0}")]
    InvalidConfig(String),
    #[error("log offset k must be positive and finite, got {0}")]
    NonPositiveK(f64),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("cannot smooth from scale {current} to coarser-or-equal target {target}")]
    ScaleOrder { current: usize, target: usize },
    #[error(transparent)]
    Dtcwt(#[from] DtcwtError),
}

/// One pipeline resolution: the square side the input is resized to, the
/// transform depth, and the smoothing depth `J` (defaults to `levels`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Resolution {
    pub side: usize,
    pub levels: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invariance_scale: Option<usize>,
}

impl Resolution {
    pub fn new(side: usize, levels: usize) -> Self {
        Resolution {
            side,
            levels,
            invariance_scale: None,
        }
    }

    /// Smoothing depth `J`.
    pub fn j(&self) -> usize {
        self.invariance_scale.unwrap_or(self.levels)
    }

    /// Side length of every smoothed plane, `⌈side / 2^J⌉`.
    pub fn cells_per_side(&self) -> usize {
        self.side.div_ceil(1 << self.j())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LogMode {
    /// Envelopes are smoothed as-is.
    Off,
    /// `k[j - 1]` is used at scale `j`.
    Fixed,
    /// Placeholder until [`tune_log_params`] fills in `k`.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogParams {
    pub mode: LogMode,
    #[serde(default)]
    pub k: Vec<f64>,
}

impl LogParams {
    pub fn off() -> Self {
        LogParams {
            mode: LogMode::Off,
            k: Vec::new(),
        }
    }

    pub fn fixed(k: Vec<f64>) -> Self {
        LogParams { mode: LogMode::Fixed, k }
    }

    pub fn auto() -> Self {
        LogParams {
            mode: LogMode::Auto,
            k: Vec::new(),
        }
    }

    pub fn enabled(&self) -> bool {
        self.mode != LogMode::Off
    }
}

impl Default for LogParams {
    fn default() -> Self {
        LogParams::fixed(vec![1.1, 3.8, 3.8, 7.0])
    }
}

/// Which `(j1, j2)` scale paths the second layer computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SecondLayerRule {
    /// Every `j1 < j2 ≤ levels`.
    #[default]
    IncreasingScale,
    /// No second layer.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelMode {
    /// Each colour channel runs through its own pipeline.
    #[default]
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterConfig {
    pub resolutions: Vec<Resolution>,
    pub orientations: usize,
    pub log: LogParams,
    pub second_layer: SecondLayerRule,
    pub channel_mode: ChannelMode,
    /// Channels expected on input.
    pub channels: usize,
}

impl Default for ScatterConfig {
    fn default() -> Self {
        ScatterConfig {
            resolutions: vec![Resolution::new(64, 5), Resolution::new(48, 4)],
            orientations: ORIENTATIONS,
            log: LogParams::default(),
            second_layer: SecondLayerRule::IncreasingScale,
            channel_mode: ChannelMode::Independent,
            channels: 3,
        }
    }
}

impl ScatterConfig {
    /// Checks the structural invariants. `Auto` log mode passes; extraction
    /// rejects it separately.
    pub fn validate(&self) -> Result<(), ScatterError> {
        let bad = |m: String| Err(ScatterError::InvalidConfig(m));
        if self.resolutions.is_empty() {
            return bad("no resolutions".into());
        }
        if self.orientations != ORIENTATIONS {
            return bad(format!("orientations must be {ORIENTATIONS}"));
        }
        if self.channels == 0 {
            return bad("channels must be at least 1".into());
        }
        for r in &self.resolutions {
            if r.levels < 2 {
                return bad(format!("resolution {} needs at least 2 levels", r.side));
            }
            if r.side < (1 << r.levels) {
                return bad(format!("side {} admits fewer than {} levels", r.side, r.levels));
            }
            if r.j() < r.levels {
                return bad(format!("invariance scale {} is below levels {}", r.j(), r.levels));
            }
            if r.j() > 16 {
                return bad(format!("invariance scale {} is too large", r.j()));
            }
        }
        if self.log.mode == LogMode::Fixed {
            let need = self.max_levels() - 1;
            if self.log.k.len() < need {
                return bad(format!("{} log offsets given, {need} needed", self.log.k.len()));
            }
            if let Some(&k) = self.log.k.iter().find(|&&k| !(k > 0.0) || !k.is_finite()) {
                return Err(ScatterError::NonPositiveK(k));
            }
        }
        Ok(())
    }

    pub fn max_levels(&self) -> usize {
        self.resolutions.iter().map(|r| r.levels).max().unwrap_or(0)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn from_toml(text: &str) -> Result<Self, ScatterError> {
        toml::from_str(text).map_err(|e| ScatterError::InvalidConfig(e.to_string()))
    }

    /// First eight bytes (little-endian) of SHA-256 over the TOML form.
    pub fn hash(&self) -> u64 {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        u64::from_le_bytes(digest[..8].try_into().unwrap())
    }

    /// Offset used at `scale`, or `None` when the log is skipped there.
    pub fn log_offset(&self, scale: usize, levels: usize) -> Option<f64> {
        if self.log.mode == LogMode::Off || scale >= levels {
            None
        } else {
            self.log.k.get(scale - 1).copied()
        }
    }
}

/// Where one feature comes from. Scales are 1-based, orientations and
/// channels 0-based; unused path entries are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FeatureDescriptor {
    pub resolution: u8,
    pub layer: u8,
    pub j1: Option<u8>,
    pub j2: Option<u8>,
    pub r1: Option<u8>,
    pub r2: Option<u8>,
    pub row: u16,
    pub col: u16,
    pub channel: u8,
    /// The first-layer envelope on this path went through the log.
    pub log_applied: bool,
}
