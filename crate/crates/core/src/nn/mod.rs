//! From-scratch dense feed-forward network: forward pass, backpropagation,
//! dropout, initialization, and a deterministic mini-batch training loop.
//!
//! Weights are stored row-major as (out, in) per layer. The loss is plain
//! MSE over the batch. All randomness (init, shuffling, dropout masks) is
//! derived from the spec seed, so training the same spec on the same data
//! twice yields bitwise-identical models.

pub mod activation;
pub mod dropout;
pub mod init;
pub mod linalg;
pub mod optim;

use std::path::Path;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use activation::{activate, ActivationKind, SELU_ALPHA, SELU_LAMBDA};
pub use dropout::dropout_apply;
pub use init::{init_weights, InitScheme};
pub use linalg::Matrix;
pub use optim::{OptimizerKind, OptimizerState};

use crate::seed;

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("dropout rate {0} outside [0, 1)")]
    InvalidRate(f64),
    #[error("invalid network spec: {0}")]
    InvalidSpec(String),
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
    #[error("empty dataset")]
    EmptyDataset,
    #[error("loss diverged at epoch {epoch}: {loss}")]
    DivergedLoss { epoch: usize, loss: f64 },
    #[error("model file error: {0}")]
    Io(#[from] std::io::Error),
    #[error("model format error: {0}")]
    Format(#[from] serde_json::Error),
}

/// One hidden layer: width and activation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HiddenLayer {
    pub width: usize,
    pub activation: ActivationKind,
}

/// Architecture description. The output layer is always a single linear
/// unit (scalar regression); `dropout_rates[i]` applies after hidden layer
/// `i` during training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    pub input_width: usize,
    pub hidden: Vec<HiddenLayer>,
    pub dropout_rates: Vec<f64>,
    pub init: InitScheme,
    pub seed: u64,
}

impl NetworkSpec {
    pub const OUTPUT_WIDTH: usize = 1;

    /// Plain multilayer perceptron with one activation everywhere and no
    /// dropout.
    pub fn mlp(input_width: usize, widths: &[usize], activation: ActivationKind, seed: u64) -> Self {
        NetworkSpec {
            input_width,
            hidden: widths.iter().map(|&w| HiddenLayer { width: w, activation }).collect(),
            dropout_rates: vec![0.0; widths.len()],
            init: InitScheme::PerActivation,
            seed,
        }
    }

    pub fn with_dropout(mut self, rates: &[f64]) -> Self {
        self.dropout_rates = rates.to_vec();
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), NnError> {
        if self.input_width == 0 {
            return Err(NnError::InvalidSpec("input width must be at least 1".into()));
        }
        if self.hidden.iter().any(|h| h.width == 0) {
            return Err(NnError::InvalidSpec("hidden widths must be at least 1".into()));
        }
        if self.dropout_rates.len() != self.hidden.len() {
            return Err(NnError::InvalidSpec(format!(
                "{} dropout rates for {} hidden layers",
                self.dropout_rates.len(),
                self.hidden.len()
            )));
        }
        for &rate in &self.dropout_rates {
            dropout::validate_rate(rate)?;
        }
        Ok(())
    }

    /// `6-60-90-60-1` style shape string.
    pub fn shape_string(&self) -> String {
        let mut parts = vec![self.input_width.to_string()];
        parts.extend(self.hidden.iter().map(|h| h.width.to_string()));
        parts.push(Self::OUTPUT_WIDTH.to_string());
        parts.join("-")
    }

    fn has_dropout(&self) -> bool {
        self.dropout_rates.iter().any(|&r| r > 0.0)
    }
}

/// Dense layer parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// (out, in), row-major.
    pub weights: Matrix,
    pub biases: Vec<f64>,
    pub activation: ActivationKind,
}

/// Gradients with the same shapes as the layer stack.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGradient>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

/// Per-feature z-score scaler fitted on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Scaler {
    /// Identity scaler (used where features are already normalized).
    pub fn identity(width: usize) -> Self {
        Scaler { means: vec![0.0; width], stds: vec![1.0; width] }
    }

    pub fn fit(x: &Matrix) -> Self {
        let n = x.rows.max(1) as f64;
        let mut means = vec![0.0; x.cols];
        for i in 0..x.rows {
            for (m, &v) in means.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut stds = vec![0.0; x.cols];
        for i in 0..x.rows {
            for ((s, &v), &m) in stds.iter_mut().zip(x.row(i)).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut stds {
            *s = (*s / n).sqrt();
            // Constant features scale to zero deviation either way.
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Scaler { means, stds }
    }

    pub fn transform(&self, x: &Matrix) -> Matrix {
        let mut out = x.clone();
        for i in 0..out.rows {
            let row = out.row_mut(i);
            for ((v, &m), &s) in row.iter_mut().zip(&self.means).zip(&self.stds) {
                *v = (*v - m) / s;
            }
        }
        out
    }
}

/// Frozen result of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: NetworkSpec,
    pub layers: Vec<Layer>,
    pub scaler: Scaler,
    pub training_loss_trace: Vec<f64>,
}

/// Training hyperparameters. The defaults are what the benchmark grid
/// uses when a config does not override them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub loss: LossKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LossKind {
    #[default]
    Mse,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            epochs: 500,
            batch_size: 32,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::default(),
            loss: LossKind::Mse,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), NnError> {
        if self.batch_size == 0 {
            return Err(NnError::InvalidHyperparams("batch size must be at least 1".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(NnError::InvalidHyperparams(format!(
                "learning rate {} must be positive",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// Forward-pass intermediates kept for backpropagation.
struct Trace {
    /// Pre-activations per layer.
    zs: Vec<Matrix>,
    /// Post-activation (and post-dropout) outputs per layer.
    activations: Vec<Matrix>,
}

fn check_batch(layers: &[Layer], batch: &Matrix) -> Result<(), NnError> {
    let expected = layers.first().map_or(0, |l| l.weights.cols);
    if batch.cols != expected {
        return Err(NnError::ShapeMismatch(format!(
            "batch has {} features, network expects {}",
            batch.cols, expected
        )));
    }
    Ok(())
}

/// Runs the stack forward, applying the given per-gap multiplier masks to
/// hidden activations (None = no dropout anywhere).
fn forward_trace(layers: &[Layer], batch: &Matrix, masks: Option<&[Option<Matrix>]>) -> Trace {
    let mut zs = Vec::with_capacity(layers.len());
    let mut activations = Vec::with_capacity(layers.len());
    let mut current = batch.clone();
    for (l, layer) in layers.iter().enumerate() {
        let mut z = current.mul_transpose(&layer.weights);
        z.add_row_vector(&layer.biases);
        let mut a = z.map(|v| layer.activation.apply(v));
        if l + 1 < layers.len() {
            if let Some(masks) = masks {
                if let Some(mask) = &masks[l] {
                    a.hadamard_assign(mask);
                }
            }
        }
        zs.push(z);
        activations.push(a.clone());
        current = a;
    }
    Trace { zs, activations }
}

/// Builds per-gap dropout masks for a batch from one RNG stream. Gaps with
/// rate 0 draw nothing, so a (0, 0, 0) spec trains exactly like one with
/// no dropout at all.
fn build_masks(
    spec: &NetworkSpec,
    batch_rows: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Option<Matrix>> {
    spec.hidden
        .iter()
        .zip(&spec.dropout_rates)
        .map(|(h, &rate)| {
            if rate > 0.0 {
                Some(dropout::mask_matrix(rng, batch_rows, h.width, rate))
            } else {
                None
            }
        })
        .collect()
}

/// Inference forward pass over a scaled batch: returns one prediction per
/// row.
pub fn forward_layers(layers: &[Layer], batch: &Matrix) -> Result<Vec<f64>, NnError> {
    check_batch(layers, batch)?;
    let trace = forward_trace(layers, batch, None);
    Ok(trace.activations.last().expect("at least one layer").data.clone())
}

/// Batch MSE of the stack on scaled inputs: `Σ(pred−target)²/n`.
pub fn mse_loss(layers: &[Layer], batch: &Matrix, targets: &[f64]) -> Result<f64, NnError> {
    if batch.rows != targets.len() {
        return Err(NnError::ShapeMismatch(format!(
            "{} rows vs {} targets",
            batch.rows,
            targets.len()
        )));
    }
    let preds = forward_layers(layers, batch)?;
    let n = targets.len() as f64;
    Ok(preds.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / n)
}

/// Analytic gradients of the batch MSE, optionally through dropout masks.
fn backward_with_masks(
    layers: &[Layer],
    batch: &Matrix,
    targets: &[f64],
    masks: Option<&[Option<Matrix>]>,
) -> Result<(Gradients, f64), NnError> {
    check_batch(layers, batch)?;
    if batch.rows != targets.len() {
        return Err(NnError::ShapeMismatch(format!(
            "{} rows vs {} targets",
            batch.rows,
            targets.len()
        )));
    }
    let n = batch.rows as f64;
    let trace = forward_trace(layers, batch, masks);
    let preds = &trace.activations[layers.len() - 1];

    let mut loss = 0.0;
    // d(MSE)/d(pred) = 2(pred − target)/n; linear output layer, so this is
    // also d(loss)/d(z) for the last layer.
    let mut delta = Matrix::zeros(batch.rows, 1);
    for (i, &target) in targets.iter().enumerate() {
        let r = preds.get(i, 0) - target;
        loss += r * r;
        delta.set(i, 0, 2.0 * r / n);
    }
    loss /= n;

    let mut grads: Vec<LayerGradient> = (0..layers.len())
        .map(|l| LayerGradient {
            weights: Matrix::zeros(layers[l].weights.rows, layers[l].weights.cols),
            biases: vec![0.0; layers[l].biases.len()],
        })
        .collect();

    for l in (0..layers.len()).rev() {
        let input: &Matrix = if l == 0 { batch } else { &trace.activations[l - 1] };
        grads[l].weights = delta.transpose_mul(input);
        grads[l].biases = delta.column_sums();
        if l > 0 {
            // Pull the error back through the weights, the dropout mask on
            // the previous activation, and its nonlinearity.
            let mut upstream = delta.mul(&layers[l].weights);
            if let Some(masks) = masks {
                if let Some(mask) = &masks[l - 1] {
                    upstream.hadamard_assign(mask);
                }
            }
            let z = &trace.zs[l - 1];
            let act = layers[l - 1].activation;
            for (u, &zv) in upstream.data.iter_mut().zip(&z.data) {
                *u *= act.derivative(zv);
            }
            delta = upstream;
        }
    }
    Ok((Gradients { layers: grads }, loss))
}

/// Analytic gradients of the batch MSE without dropout (the inference
/// path). Training uses the masked variant internally.
pub fn backward_layers(
    layers: &[Layer],
    batch: &Matrix,
    targets: &[f64],
) -> Result<Gradients, NnError> {
    backward_with_masks(layers, batch, targets, None).map(|(g, _)| g)
}

impl TrainedModel {
    /// Forward pass over an already-scaled batch. With `training` set,
    /// dropout masks are drawn from `mask_seed`; inference ignores the
    /// seed entirely.
    pub fn forward(
        &self,
        batch: &Matrix,
        training: bool,
        mask_seed: u64,
    ) -> Result<Vec<f64>, NnError> {
        if !training || !self.spec.has_dropout() {
            return forward_layers(&self.layers, batch);
        }
        check_batch(&self.layers, batch)?;
        let mut rng = ChaCha8Rng::seed_from_u64(mask_seed);
        let masks = build_masks(&self.spec, batch.rows, &mut rng);
        let trace = forward_trace(&self.layers, batch, Some(&masks));
        Ok(trace.activations.last().expect("at least one layer").data.clone())
    }

    /// Gradient of the batch MSE along the inference path.
    pub fn backward(&self, batch: &Matrix, targets: &[f64]) -> Result<Gradients, NnError> {
        backward_layers(&self.layers, batch, targets)
    }

    /// Scales raw feature rows and predicts.
    pub fn predict(&self, features: &Matrix) -> Result<Vec<f64>, NnError> {
        let scaled = self.scaler.transform(features);
        forward_layers(&self.layers, &scaled)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, NnError> {
        let model: TrainedModel = serde_json::from_str(text)?;
        model.spec.validate()?;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), NnError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, NnError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Trains a network on raw (unscaled) features.
///
/// Fits the z-score scaler on the training rows, initializes weights from
/// `spec.seed`, and runs `hp.epochs` of mini-batch optimization with a
/// fresh deterministic shuffle per epoch. Returns the frozen model with
/// its per-epoch loss trace.
pub fn train(
    spec: &NetworkSpec,
    x: &Matrix,
    y: &[f64],
    hp: &Hyperparams,
) -> Result<TrainedModel, NnError> {
    spec.validate()?;
    hp.validate()?;
    if x.rows == 0 {
        return Err(NnError::EmptyDataset);
    }
    if x.rows != y.len() {
        return Err(NnError::ShapeMismatch(format!("{} rows vs {} targets", x.rows, y.len())));
    }
    if x.cols != spec.input_width {
        return Err(NnError::ShapeMismatch(format!(
            "{} features vs input width {}",
            x.cols, spec.input_width
        )));
    }
    if x.rows < hp.batch_size {
        return Err(NnError::InvalidHyperparams(format!(
            "batch size {} exceeds dataset size {}",
            hp.batch_size, x.rows
        )));
    }

    let scaler = Scaler::fit(x);
    let scaled = scaler.transform(x);
    let mut layers = init_weights(spec);
    let mut optimizer = OptimizerState::new(hp.optimizer, &layers);
    let mut trace = Vec::with_capacity(hp.epochs);

    let mut indices: Vec<usize> = (0..x.rows).collect();
    for epoch in 0..hp.epochs {
        let mut shuffle_rng =
            ChaCha8Rng::seed_from_u64(seed::derive_indexed(spec.seed, "shuffle", epoch as u64));
        indices.shuffle(&mut shuffle_rng);

        let mask_base = seed::derive_indexed(spec.seed, "dropout", epoch as u64);
        let mut epoch_loss = 0.0;
        for (batch_idx, chunk) in indices.chunks(hp.batch_size).enumerate() {
            let batch = gather_rows(&scaled, chunk);
            let targets: Vec<f64> = chunk.iter().map(|&i| y[i]).collect();
            let masks = if spec.has_dropout() {
                let mut rng = ChaCha8Rng::seed_from_u64(seed::derive_indexed(
                    mask_base,
                    "batch",
                    batch_idx as u64,
                ));
                Some(build_masks(spec, batch.rows, &mut rng))
            } else {
                None
            };
            let (grads, loss) = backward_with_masks(&layers, &batch, &targets, masks.as_deref())?;
            if !loss.is_finite() {
                return Err(NnError::DivergedLoss { epoch, loss });
            }
            optimizer.step(&mut layers, &grads, hp.learning_rate);
            epoch_loss += loss * chunk.len() as f64;
        }
        epoch_loss /= x.rows as f64;
        if !epoch_loss.is_finite() {
            return Err(NnError::DivergedLoss { epoch, loss: epoch_loss });
        }
        trace.push(epoch_loss);
    }

    Ok(TrainedModel { spec: spec.clone(), layers, scaler, training_loss_trace: trace })
}

fn gather_rows(x: &Matrix, indices: &[usize]) -> Matrix {
    let mut out = Matrix::zeros(indices.len(), x.cols);
    for (dst, &src) in indices.iter().enumerate() {
        out.row_mut(dst).copy_from_slice(x.row(src));
    }
    out
}
