//! Trainable error-correction models and their on-disk container.
//!
//! Three model families cover the correction pipeline: a joint
//! (sin, cos, distance) regression head (MLP or boosted trees), a four-zone
//! classifier (MLP or one-vs-rest boosted trees), and per-zone polynomial
//! correction curves. A saved model embeds the feature spec and antenna
//! geometry so inference is self-contained.

pub mod gbt;
pub mod mlp;
pub mod poly;
mod store;

use crate::angle::Angle;
use crate::features::{FeatureSpec, Zone};
use crate::propagation::AntennaGeometry;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gbt::{train_gbt, GbtConfig, GbtModel, RegressionTree, TreeNode};
pub use mlp::{
    mlp_gradient_check, train_mlp, MlpArchitecture, MlpModel, OutputActivation, TrainingLog,
};
pub use poly::{fit_zone_polynomial, ZonePolynomial};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid model configuration: {0}")]
    InvalidArchitecture(&'static str),
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("training diverged at epoch {epoch}")]
    TrainingDiverged { epoch: usize },
    #[error("design matrix is rank deficient")]
    DegenerateFit,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("corrupt model file: {0}")]
    Corrupt(String),
    #[error("unsupported model file version {found}")]
    VersionMismatch { found: u32 },
}

/// Training loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    SquaredError,
    CrossEntropy,
}

/// Deterministic training configuration shared by the network trainers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub early_stop_patience: Option<usize>,
    pub loss: Loss,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            seed: 0,
            epochs: 40,
            batch_size: 32,
            learning_rate: 0.02,
            momentum: 0.9,
            early_stop_patience: None,
            loss: Loss::SquaredError,
        }
    }
}

/// What a boosted ensemble was trained for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GbtTask {
    /// One model per regression output.
    Regression,
    /// One-vs-rest model per zone.
    Classification,
}

/// A set of boosted models, one per output dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GbtEnsemble {
    pub models: Vec<GbtModel>,
    pub task: GbtTask,
}

impl GbtEnsemble {
    pub fn predict(&self, features: &[f64]) -> Vec<f64> {
        self.models.iter().map(|m| m.predict(features)).collect()
    }
}

/// Any trained corrector, as stored in a model file.
#[derive(Debug, Clone, PartialEq)]
pub enum CorrectionModel {
    Mlp(MlpModel),
    Gbt(GbtEnsemble),
    ZonePolynomials(Vec<ZonePolynomial>),
}

impl CorrectionModel {
    /// Raw regression outputs (sin, cos, scaled distance).
    pub fn regression_outputs(&self, features: &[f64]) -> Result<Vec<f64>, ModelError> {
        match self {
            CorrectionModel::Mlp(m) => {
                if m.output_activation != OutputActivation::Identity {
                    return Err(ModelError::InvalidArchitecture(
                        "classification model used where a regressor is needed",
                    ));
                }
                m.predict(features)
            }
            CorrectionModel::Gbt(e) => {
                if e.task != GbtTask::Regression {
                    return Err(ModelError::InvalidArchitecture(
                        "classification model used where a regressor is needed",
                    ));
                }
                Ok(e.predict(features))
            }
            CorrectionModel::ZonePolynomials(_) => Err(ModelError::InvalidArchitecture(
                "zone polynomials correct raw estimates, not feature vectors",
            )),
        }
    }

    /// Normalized class scores over the four zones.
    pub fn class_scores(&self, features: &[f64]) -> Result<[f64; 4], ModelError> {
        let scores: Vec<f64> = match self {
            CorrectionModel::Mlp(m) => {
                if m.output_activation != OutputActivation::Softmax || m.output_len() != 4 {
                    return Err(ModelError::InvalidArchitecture(
                        "zone classification needs a 4-way softmax head",
                    ));
                }
                m.predict(features)?
            }
            CorrectionModel::Gbt(e) => {
                if e.task != GbtTask::Classification || e.models.len() != 4 {
                    return Err(ModelError::InvalidArchitecture(
                        "zone classification needs four one-vs-rest models",
                    ));
                }
                softmax4(e.predict(features))
            }
            CorrectionModel::ZonePolynomials(_) => {
                return Err(ModelError::InvalidArchitecture(
                    "zone polynomials do not classify",
                ))
            }
        };
        Ok([scores[0], scores[1], scores[2], scores[3]])
    }
}

fn softmax4(raw: Vec<f64>) -> Vec<f64> {
    let max = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = raw.iter().map(|v| (v - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Applies a predicted (sin, cos) error to a raw angle estimate. The flag
/// reports that the unwrapped corrected angle left (-180, +180], which a
/// sound correction never produces.
pub fn apply_angle_correction(sin_err: f64, cos_err: f64, raw_estimate: Angle) -> (Angle, bool) {
    let correction = sin_err.atan2(cos_err).to_degrees();
    let unwrapped = raw_estimate.degrees() + correction;
    let out_of_range = !(unwrapped > -180.0 && unwrapped <= 180.0);
    (Angle::from_finite(unwrapped), out_of_range)
}

/// Runs the regression model and applies its angle correction.
pub fn predict_angle_correction(
    model: &CorrectionModel,
    features: &[f64],
    raw_estimate: Angle,
) -> Result<(Angle, bool), ModelError> {
    let outputs = model.regression_outputs(features)?;
    if outputs.len() < 2 {
        return Err(ModelError::DimensionMismatch {
            expected: 2,
            got: outputs.len(),
        });
    }
    Ok(apply_angle_correction(outputs[0], outputs[1], raw_estimate))
}

/// Zone decision with its score vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub zone: Zone,
    pub scores: [f64; 4],
    /// Set when two classes scored exactly equal; the lowest index wins.
    pub tie: bool,
}

/// Argmax zone over normalized class scores; exact ties go to the lowest
/// index and are flagged.
pub fn classify_zone(
    model: &CorrectionModel,
    features: &[f64],
) -> Result<Classification, ModelError> {
    let scores = model.class_scores(features)?;
    let mut best = 0usize;
    let mut tie = false;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
            tie = false;
        } else if s == scores[best] {
            tie = true;
        }
    }
    Ok(Classification {
        zone: Zone::from_index(best).expect("index < 4"),
        scores,
        tie,
    })
}

/// A trained model bundled with everything inference needs.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub feature_spec: FeatureSpec,
    pub geometry: AntennaGeometry,
    pub model: CorrectionModel,
}

/// Writes the versioned binary container; returns the serialized byte size.
pub fn save_model(saved: &SavedModel, path: &std::path::Path) -> Result<u64, ModelError> {
    store::save(saved, path)
}

/// Reads a model container; returns the model and its byte size.
pub fn load_model(path: &std::path::Path) -> Result<(SavedModel, u64), ModelError> {
    store::load(path)
}
