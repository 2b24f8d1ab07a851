//! Run configuration: a TOML file with command-line overrides. Every
//! command echoes its fully resolved configuration into the output
//! directory so runs can be reproduced from the artifacts alone.

use crate::channel::ChannelProfile;
use crate::dataset::{FilterSpec, SplitSpec};
use crate::features::FeatureFlags;
use crate::propagation::{AntennaGeometry, PropagationError};
use serde::{Deserialize, Serialize};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config field '{field}': {reason}")]
    Invalid { field: &'static str, reason: String },
}

/// Antenna-array parameters. Leaving `antenna_spacing_m` unset selects the
/// ideal half-wavelength spacing for the carrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub carrier_frequency_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub antenna_spacing_m: Option<f64>,
    pub effective_spacing_delta_m: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            carrier_frequency_hz: 6.4896e9,
            antenna_spacing_m: None,
            effective_spacing_delta_m: 0.0077,
        }
    }
}

impl GeometryConfig {
    pub fn build(&self) -> Result<AntennaGeometry, ConfigError> {
        let map = |e: PropagationError| ConfigError::Invalid {
            field: "geometry",
            reason: e.to_string(),
        };
        match self.antenna_spacing_m {
            Some(spacing) => {
                AntennaGeometry::new(
                    self.carrier_frequency_hz,
                    spacing,
                    self.effective_spacing_delta_m,
                )
                .map_err(map)
            }
            None => {
                let mut geom =
                    AntennaGeometry::half_wavelength(self.carrier_frequency_hz).map_err(map)?;
                geom.effective_spacing_delta = self.effective_spacing_delta_m;
                Ok(geom)
            }
        }
    }
}

/// Rotation-sweep shape for `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub distances_m: Vec<f64>,
    pub angle_step_deg: f64,
    pub records_per_pose: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            distances_m: (1..=11).map(|k| k as f64 * 0.5).collect(),
            angle_step_deg: 1.0,
            records_per_pose: 5,
        }
    }
}

/// Feature-stage settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureConfig {
    pub window_before: usize,
    pub window_after: usize,
    pub include: FeatureFlags,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            window_before: 5,
            window_after: 100,
            include: FeatureFlags::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainTask {
    Regression,
    ZoneClassify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Mlp,
    Gbt,
    Poly,
}

/// Training settings for `train`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub task: TrainTask,
    pub model: ModelKind,
    /// Hidden layer widths for the network model.
    pub hidden: Vec<usize>,
    /// Training-only dropout rates, one per hidden layer (empty = none).
    pub dropout: Vec<f64>,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub early_stop_patience: Option<usize>,
    /// Boosted-tree settings.
    pub n_estimators: usize,
    pub max_depth: usize,
    pub gbt_learning_rate: f64,
    /// Per-zone polynomial degree.
    pub poly_degree: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        TrainSection {
            task: TrainTask::Regression,
            model: ModelKind::Mlp,
            hidden: vec![224],
            dropout: Vec::new(),
            epochs: 40,
            batch_size: 32,
            learning_rate: 0.02,
            momentum: 0.9,
            early_stop_patience: None,
            n_estimators: 100,
            max_depth: 4,
            gbt_learning_rate: 0.1,
            poly_degree: 3,
        }
    }
}

/// One evaluation window in plain degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub center_deg: f64,
    pub half_width_deg: f64,
}

/// Evaluation settings for `evaluate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub windows: Vec<WindowConfig>,
    pub stability_group_size: usize,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        EvaluateSection {
            windows: vec![
                WindowConfig {
                    center_deg: 0.0,
                    half_width_deg: 180.0,
                },
                WindowConfig {
                    center_deg: 0.0,
                    half_width_deg: 45.0,
                },
                WindowConfig {
                    center_deg: 180.0,
                    half_width_deg: 45.0,
                },
            ],
            stability_group_size: 10,
        }
    }
}

fn default_channel() -> ChannelProfile {
    ChannelProfile::calibrated_indoor()
}

/// Fully resolved run configuration.
///
/// Note: when a `[channel]` section is present it replaces the default
/// office profile wholesale; omitted channel fields fall back to the clean
/// line-of-sight defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub geometry: GeometryConfig,
    pub channel: ChannelProfile,
    pub sweep: SweepConfig,
    pub filters: FilterSpec,
    pub split: SplitSpec,
    pub features: FeatureConfig,
    pub train: TrainSection,
    pub evaluate: EvaluateSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            geometry: GeometryConfig::default(),
            channel: default_channel(),
            sweep: SweepConfig::default(),
            filters: FilterSpec::default(),
            split: SplitSpec::default(),
            features: FeatureConfig::default(),
            train: TrainSection::default(),
            evaluate: EvaluateSection::default(),
        }
    }
}

impl RunConfig {
    /// Loads a TOML config; `None` gives the built-in defaults.
    pub fn load(path: Option<&Path>) -> Result<RunConfig, ConfigError> {
        let config = match path {
            None => RunConfig::default(),
            Some(p) => {
                let raw = std::fs::read_to_string(p)?;
                toml::from_str(&raw).map_err(|e| ConfigError::Parse(e.to_string()))?
            }
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.geometry.build()?;
        self.channel.validate().map_err(|e| ConfigError::Invalid {
            field: "channel",
            reason: e.to_string(),
        })?;
        if self.sweep.distances_m.iter().any(|&d| !(d > 0.0)) {
            return Err(ConfigError::Invalid {
                field: "sweep.distances_m",
                reason: "distances must be positive".to_string(),
            });
        }
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return Err(ConfigError::Invalid {
                field: "split.train_fraction",
                reason: format!("{} outside (0, 1)", self.split.train_fraction),
            });
        }
        if self.features.window_before + self.features.window_after + 1
            > crate::channel::CIR_LEN
        {
            return Err(ConfigError::Invalid {
                field: "features.window_before/window_after",
                reason: "window longer than the CIR".to_string(),
            });
        }
        if self.train.model == ModelKind::Poly && self.train.poly_degree > 5 {
            return Err(ConfigError::Invalid {
                field: "train.poly_degree",
                reason: "degree is limited to 5".to_string(),
            });
        }
        Ok(())
    }

    /// Serializes the resolved config (the reproducibility echo).
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid_and_paper_shaped() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.sweep.distances_m.len(), 11);
        assert_eq!(cfg.sweep.angle_step_deg, 1.0);
        assert_eq!(cfg.sweep.records_per_pose, 5);
        assert_eq!(cfg.train.hidden, vec![224]);
        assert_eq!(cfg.train.n_estimators, 100);
        let geom = cfg.geometry.build().unwrap();
        assert!((geom.antenna_spacing - 0.023097914971646944).abs() < 1e-12);
        assert_eq!(geom.effective_spacing_delta, 0.0077);
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn partial_config_overrides_defaults() {
        let cfg: RunConfig = toml::from_str(
            r#"
            seed = 7
            [sweep]
            distances_m = [3.0]
            angle_step_deg = 90.0
            records_per_pose = 1
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.sweep.distances_m, vec![3.0]);
        // Untouched sections keep their defaults.
        assert_eq!(cfg.train.hidden, vec![224]);
    }

    #[test]
    fn unknown_fields_are_named_in_the_error() {
        let err = toml::from_str::<RunConfig>("mystery_field = 1").unwrap_err();
        assert!(err.to_string().contains("mystery_field"));
        let err =
            toml::from_str::<RunConfig>("[sweep]\nangle_sep_deg = 1.0").unwrap_err();
        assert!(err.to_string().contains("angle_sep_deg"));
    }

    #[test]
    fn invalid_values_name_their_field() {
        let mut cfg = RunConfig::default();
        cfg.split.train_fraction = 1.5;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("train_fraction"));

        let mut cfg = RunConfig::default();
        cfg.sweep.distances_m = vec![-1.0];
        assert!(cfg.validate().unwrap_err().to_string().contains("distances_m"));
    }

    #[test]
    fn half_wavelength_spacing_when_unset() {
        let cfg: RunConfig = toml::from_str(
            r#"
            [geometry]
            carrier_frequency_hz = 6.4896e9
            effective_spacing_delta_m = 0.0
            "#,
        )
        .unwrap();
        let geom = cfg.geometry.build().unwrap();
        assert!((geom.antenna_spacing - 0.023097914971646944).abs() < 1e-12);
    }
}
