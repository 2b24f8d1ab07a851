//! Fully connected network with rectifier hidden units, trained by
//! mini-batch gradient descent with momentum. Everything is deterministic
//! for a fixed seed: weight init, epoch shuffling, and dropout masks all
//! come from one counter-based generator.

use super::{Loss, ModelError, TrainConfig};
use crate::features::FeatureVector;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputActivation {
    /// Raw affine outputs (regression).
    Identity,
    /// Normalized exponential over the outputs (classification scores).
    Softmax,
}

/// One dense layer, row-major weights (rows = outputs, cols = inputs).
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros_like(&self) -> Layer {
        Layer {
            rows: self.rows,
            cols: self.cols,
            weights: vec![0.0; self.weights.len()],
            biases: vec![0.0; self.biases.len()],
        }
    }

    fn affine(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for r in 0..self.rows {
            let row = &self.weights[r * self.cols..(r + 1) * self.cols];
            let mut acc = self.biases[r];
            for (w, x) in row.iter().zip(input) {
                acc += w * x;
            }
            out.push(acc);
        }
    }
}

/// Network shape and training-only dropout rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpArchitecture {
    pub input: usize,
    pub hidden: Vec<usize>,
    pub output: usize,
    pub output_activation: OutputActivation,
    /// Dropout rate per hidden layer; empty means none.
    pub dropout: Vec<f64>,
}

impl MlpArchitecture {
    pub fn new(
        input: usize,
        hidden: Vec<usize>,
        output: usize,
        output_activation: OutputActivation,
    ) -> Self {
        MlpArchitecture {
            input,
            hidden,
            output,
            output_activation,
            dropout: Vec::new(),
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.input == 0 || self.output == 0 {
            return Err(ModelError::InvalidArchitecture(
                "input and output widths must be positive",
            ));
        }
        if self.hidden.is_empty() || self.hidden.len() > 3 {
            return Err(ModelError::InvalidArchitecture(
                "between 1 and 3 hidden layers",
            ));
        }
        if self.hidden.iter().any(|&h| h == 0) {
            return Err(ModelError::InvalidArchitecture(
                "hidden widths must be positive",
            ));
        }
        if !self.dropout.is_empty() && self.dropout.len() != self.hidden.len() {
            return Err(ModelError::InvalidArchitecture(
                "one dropout rate per hidden layer",
            ));
        }
        if self.dropout.iter().any(|&p| !(0.0..1.0).contains(&p)) {
            return Err(ModelError::InvalidArchitecture(
                "dropout rates must lie in [0, 1)",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
    pub output_activation: OutputActivation,
    pub dropout: Vec<f64>,
}

impl MlpModel {
    /// Fresh model with fan-in scaled uniform weights and zero biases.
    pub fn initialize(arch: &MlpArchitecture, seed: u64) -> Result<MlpModel, ModelError> {
        arch.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self::initialize_with(arch, &mut rng))
    }

    fn initialize_with(arch: &MlpArchitecture, rng: &mut ChaCha8Rng) -> MlpModel {
        let mut sizes = Vec::with_capacity(arch.hidden.len() + 2);
        sizes.push(arch.input);
        sizes.extend_from_slice(&arch.hidden);
        sizes.push(arch.output);

        let mut layers = Vec::with_capacity(sizes.len() - 1);
        for pair in sizes.windows(2) {
            let (cols, rows) = (pair[0], pair[1]);
            let bound = 1.0 / (cols as f64).sqrt();
            let weights = (0..rows * cols)
                .map(|_| rng.gen_range(-bound..bound))
                .collect();
            layers.push(Layer {
                rows,
                cols,
                weights,
                biases: vec![0.0; rows],
            });
        }
        MlpModel {
            layers,
            output_activation: arch.output_activation,
            dropout: arch.dropout.clone(),
        }
    }

    pub fn input_len(&self) -> usize {
        self.layers.first().map(|l| l.cols).unwrap_or(0)
    }

    pub fn output_len(&self) -> usize {
        self.layers.last().map(|l| l.rows).unwrap_or(0)
    }

    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.len() + l.biases.len())
            .sum()
    }

    /// Forward pass with the output activation applied.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>, ModelError> {
        if input.len() != self.input_len() {
            return Err(ModelError::DimensionMismatch {
                expected: self.input_len(),
                got: input.len(),
            });
        }
        let mut current = input.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.affine(&current, &mut next);
            if i < last {
                for v in &mut next {
                    *v = v.max(0.0);
                }
            }
            std::mem::swap(&mut current, &mut next);
        }
        if self.output_activation == OutputActivation::Softmax {
            softmax_in_place(&mut current);
        }
        Ok(current)
    }

    /// Loss and parameter gradient for a single sample (no dropout).
    pub fn loss_and_gradient(
        &self,
        input: &[f64],
        target: &[f64],
        loss: Loss,
    ) -> (f64, Vec<Layer>) {
        let mut grads: Vec<Layer> = self.layers.iter().map(Layer::zeros_like).collect();
        let mut acts = Vec::new();
        let loss_value = self.accumulate_gradient(input, target, loss, None, &mut grads, &mut acts);
        (loss_value, grads)
    }

    /// Runs forward and backward for one sample, adding the gradient into
    /// `grads`. `masks` carries pre-drawn dropout masks for hidden layers.
    fn accumulate_gradient(
        &self,
        input: &[f64],
        target: &[f64],
        loss: Loss,
        masks: Option<&[Vec<f64>]>,
        grads: &mut [Layer],
        activations: &mut Vec<Vec<f64>>,
    ) -> f64 {
        let n_layers = self.layers.len();
        // Forward, keeping every layer input.
        activations.clear();
        activations.push(input.to_vec());
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::new();
            layer.affine(activations.last().unwrap(), &mut out);
            if i < n_layers - 1 {
                for v in &mut out {
                    *v = v.max(0.0);
                }
                if let Some(masks) = masks {
                    for (v, m) in out.iter_mut().zip(&masks[i]) {
                        *v *= m;
                    }
                }
            }
            activations.push(out);
        }

        let output = activations.last().unwrap();
        let (loss_value, mut delta) = match loss {
            Loss::SquaredError => {
                let mut l = 0.0;
                let mut d = Vec::with_capacity(output.len());
                for (o, y) in output.iter().zip(target) {
                    l += 0.5 * (o - y) * (o - y);
                    d.push(o - y);
                }
                (l, d)
            }
            Loss::CrossEntropy => {
                let mut probs = output.clone();
                softmax_in_place(&mut probs);
                let mut l = 0.0;
                let mut d = Vec::with_capacity(probs.len());
                for (p, y) in probs.iter().zip(target) {
                    if *y > 0.0 {
                        l -= y * p.max(1e-300).ln();
                    }
                    d.push(p - y);
                }
                (l, d)
            }
        };

        // Backward.
        for i in (0..n_layers).rev() {
            let layer = &self.layers[i];
            let input_act = &activations[i];
            let grad = &mut grads[i];
            for r in 0..layer.rows {
                let g = delta[r];
                grad.biases[r] += g;
                let row = &mut grad.weights[r * layer.cols..(r + 1) * layer.cols];
                for (gw, x) in row.iter_mut().zip(input_act) {
                    *gw += g * x;
                }
            }
            if i > 0 {
                let mut prev_delta = vec![0.0; layer.cols];
                for r in 0..layer.rows {
                    let g = delta[r];
                    let row = &layer.weights[r * layer.cols..(r + 1) * layer.cols];
                    for (pd, w) in prev_delta.iter_mut().zip(row) {
                        *pd += g * w;
                    }
                }
                // Rectifier derivative on the post-activation (with mask).
                for (pd, a) in prev_delta.iter_mut().zip(&activations[i]) {
                    if *a <= 0.0 {
                        *pd = 0.0;
                    }
                }
                if let Some(masks) = masks {
                    for (pd, m) in prev_delta.iter_mut().zip(&masks[i - 1]) {
                        *pd *= m;
                    }
                }
                delta = prev_delta;
            }
        }
        loss_value
    }
}

fn softmax_in_place(values: &mut [f64]) {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in values.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in values.iter_mut() {
        *v /= sum;
    }
}

/// Per-epoch mean training loss.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingLog {
    pub epoch_losses: Vec<f64>,
}

/// Trains a fresh model. Zero epochs return the initialized model
/// unchanged; a non-finite epoch loss aborts with the epoch index.
pub fn train_mlp(
    arch: &MlpArchitecture,
    features: &[FeatureVector],
    targets: &[Vec<f64>],
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainingLog), ModelError> {
    if features.is_empty() {
        return Err(ModelError::EmptyTrainingSet);
    }
    if features.len() != targets.len() {
        return Err(ModelError::DimensionMismatch {
            expected: features.len(),
            got: targets.len(),
        });
    }
    for f in features {
        if f.values.len() != arch.input {
            return Err(ModelError::DimensionMismatch {
                expected: arch.input,
                got: f.values.len(),
            });
        }
    }
    for t in targets {
        if t.len() != arch.output {
            return Err(ModelError::DimensionMismatch {
                expected: arch.output,
                got: t.len(),
            });
        }
    }
    arch.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = MlpModel::initialize_with(arch, &mut rng);
    let mut velocity: Vec<Layer> = model.layers.iter().map(Layer::zeros_like).collect();
    let mut grads: Vec<Layer> = model.layers.iter().map(Layer::zeros_like).collect();
    let mut activations: Vec<Vec<f64>> = Vec::new();
    let batch_size = cfg.batch_size.max(1);
    let use_dropout = model.dropout.iter().any(|&p| p > 0.0);

    let mut indices: Vec<usize> = (0..features.len()).collect();
    let mut log = TrainingLog {
        epoch_losses: Vec::with_capacity(cfg.epochs),
    };
    let mut best_loss = f64::INFINITY;
    let mut stale_epochs = 0usize;

    for epoch in 0..cfg.epochs {
        indices.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in indices.chunks(batch_size) {
            for g in &mut grads {
                for w in &mut g.weights {
                    *w = 0.0;
                }
                for b in &mut g.biases {
                    *b = 0.0;
                }
            }
            let masks = if use_dropout {
                Some(draw_dropout_masks(&model, &mut rng))
            } else {
                None
            };
            for &idx in batch {
                epoch_loss += model.accumulate_gradient(
                    &features[idx].values,
                    &targets[idx],
                    cfg.loss,
                    masks.as_deref(),
                    &mut grads,
                    &mut activations,
                );
            }
            let scale = 1.0 / batch.len() as f64;
            for ((layer, vel), grad) in model.layers.iter_mut().zip(&mut velocity).zip(&grads) {
                for ((w, v), g) in layer
                    .weights
                    .iter_mut()
                    .zip(&mut vel.weights)
                    .zip(&grad.weights)
                {
                    *v = cfg.momentum * *v - cfg.learning_rate * g * scale;
                    *w += *v;
                }
                for ((b, v), g) in layer
                    .biases
                    .iter_mut()
                    .zip(&mut vel.biases)
                    .zip(&grad.biases)
                {
                    *v = cfg.momentum * *v - cfg.learning_rate * g * scale;
                    *b += *v;
                }
            }
        }
        let mean_loss = epoch_loss / features.len() as f64;
        if !mean_loss.is_finite() {
            return Err(ModelError::TrainingDiverged { epoch });
        }
        log.epoch_losses.push(mean_loss);
        if let Some(patience) = cfg.early_stop_patience {
            if mean_loss + 1e-12 < best_loss {
                best_loss = mean_loss;
                stale_epochs = 0;
            } else {
                stale_epochs += 1;
                if stale_epochs >= patience {
                    break;
                }
            }
        }
    }
    Ok((model, log))
}

fn draw_dropout_masks(model: &MlpModel, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let hidden_count = model.layers.len() - 1;
    (0..hidden_count)
        .map(|i| {
            let p = model.dropout.get(i).copied().unwrap_or(0.0);
            let width = model.layers[i].rows;
            if p == 0.0 {
                vec![1.0; width]
            } else {
                let keep = 1.0 - p;
                (0..width)
                    .map(|_| if rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
                    .collect()
            }
        })
        .collect()
}

/// Compares the analytic gradient against central finite differences on
/// every parameter; returns the maximum guarded relative error. Intended
/// for small models (≤ 500 parameters).
pub fn mlp_gradient_check(
    model: &MlpModel,
    input: &[f64],
    target: &[f64],
    loss: Loss,
) -> Result<f64, ModelError> {
    if input.len() != model.input_len() {
        return Err(ModelError::DimensionMismatch {
            expected: model.input_len(),
            got: input.len(),
        });
    }
    let (_, analytic) = model.loss_and_gradient(input, target, loss);
    let mut probe = model.clone();
    let step = 1e-5;
    let mut worst: f64 = 0.0;

    let layer_count = model.layers.len();
    for li in 0..layer_count {
        let n_weights = model.layers[li].weights.len();
        let n_biases = model.layers[li].biases.len();
        for pi in 0..n_weights + n_biases {
            let read = |m: &MlpModel| {
                if pi < n_weights {
                    m.layers[li].weights[pi]
                } else {
                    m.layers[li].biases[pi - n_weights]
                }
            };
            let write = |m: &mut MlpModel, v: f64| {
                if pi < n_weights {
                    m.layers[li].weights[pi] = v;
                } else {
                    m.layers[li].biases[pi - n_weights] = v;
                }
            };
            let original = read(model);
            write(&mut probe, original + step);
            let (loss_plus, _) = probe.loss_and_gradient(input, target, loss);
            write(&mut probe, original - step);
            let (loss_minus, _) = probe.loss_and_gradient(input, target, loss);
            write(&mut probe, original);
            let numeric = (loss_plus - loss_minus) / (2.0 * step);
            let a = if pi < n_weights {
                analytic[li].weights[pi]
            } else {
                analytic[li].biases[pi - n_weights]
            };
            // Guarded relative error: the 1e-4 floor keeps finite-difference
            // roundoff on near-zero gradients from dominating.
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-4);
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}
