//! Mini-batch optimizers: plain SGD and Adam.

use serde::{Deserialize, Serialize};

use super::{Gradients, Layer};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum OptimizerKind {
    Sgd,
    Adam { beta1: f64, beta2: f64, epsilon: f64 },
}

impl Default for OptimizerKind {
    fn default() -> Self {
        OptimizerKind::Adam { beta1: 0.9, beta2: 0.999, epsilon: 1e-8 }
    }
}

/// Running optimizer state, one slot per layer.
pub struct OptimizerState {
    kind: OptimizerKind,
    step: u64,
    // First/second moment estimates for weights and biases (Adam only).
    m_w: Vec<Vec<f64>>,
    v_w: Vec<Vec<f64>>,
    m_b: Vec<Vec<f64>>,
    v_b: Vec<Vec<f64>>,
}

impl OptimizerState {
    pub fn new(kind: OptimizerKind, layers: &[Layer]) -> Self {
        let m_w = layers.iter().map(|l| vec![0.0; l.weights.data.len()]).collect();
        let v_w = layers.iter().map(|l| vec![0.0; l.weights.data.len()]).collect();
        let m_b = layers.iter().map(|l| vec![0.0; l.biases.len()]).collect();
        let v_b = layers.iter().map(|l| vec![0.0; l.biases.len()]).collect();
        OptimizerState { kind, step: 0, m_w, v_w, m_b, v_b }
    }

    /// Applies one update step in place.
    pub fn step(&mut self, layers: &mut [Layer], grads: &Gradients, learning_rate: f64) {
        match self.kind {
            OptimizerKind::Sgd => {
                for (layer, grad) in layers.iter_mut().zip(&grads.layers) {
                    for (w, g) in layer.weights.data.iter_mut().zip(&grad.weights.data) {
                        *w -= learning_rate * g;
                    }
                    for (b, g) in layer.biases.iter_mut().zip(&grad.biases) {
                        *b -= learning_rate * g;
                    }
                }
            }
            OptimizerKind::Adam { beta1, beta2, epsilon } => {
                self.step += 1;
                let t = self.step as i32;
                let bias1 = 1.0 - beta1.powi(t);
                let bias2 = 1.0 - beta2.powi(t);
                for (i, (layer, grad)) in layers.iter_mut().zip(&grads.layers).enumerate() {
                    adam_update(
                        &mut layer.weights.data,
                        &grad.weights.data,
                        &mut self.m_w[i],
                        &mut self.v_w[i],
                        beta1,
                        beta2,
                        epsilon,
                        bias1,
                        bias2,
                        learning_rate,
                    );
                    adam_update(
                        &mut layer.biases,
                        &grad.biases,
                        &mut self.m_b[i],
                        &mut self.v_b[i],
                        beta1,
                        beta2,
                        epsilon,
                        bias1,
                        bias2,
                        learning_rate,
                    );
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn adam_update(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    bias1: f64,
    bias2: f64,
    learning_rate: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = beta1 * m[i] + (1.0 - beta1) * g;
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
        let m_hat = m[i] / bias1;
        let v_hat = v[i] / bias2;
        params[i] -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::linalg::Matrix;
    use crate::nn::{ActivationKind, LayerGradient};

    fn one_layer(w: f64) -> Vec<Layer> {
        vec![Layer {
            weights: Matrix::from_flat(1, 1, vec![w]),
            biases: vec![0.0],
            activation: ActivationKind::Linear,
        }]
    }

    fn grad(g: f64) -> Gradients {
        Gradients {
            layers: vec![LayerGradient {
                weights: Matrix::from_flat(1, 1, vec![g]),
                biases: vec![0.0],
            }],
        }
    }

    #[test]
    fn sgd_step_is_plain_descent() {
        let mut layers = one_layer(1.0);
        let mut state = OptimizerState::new(OptimizerKind::Sgd, &layers);
        state.step(&mut layers, &grad(0.5), 0.1);
        assert!((layers[0].weights.data[0] - 0.95).abs() < 1e-15);
    }

    #[test]
    fn adam_first_step_moves_by_learning_rate() {
        // With bias correction the first Adam step is ≈ lr·sign(g).
        let mut layers = one_layer(0.0);
        let mut state = OptimizerState::new(OptimizerKind::default(), &layers);
        state.step(&mut layers, &grad(3.0), 0.01);
        assert!((layers[0].weights.data[0] + 0.01).abs() < 1e-6);
    }

    #[test]
    fn adam_descends_quadratic() {
        // Minimize (w-2)² by feeding its gradient.
        let mut layers = one_layer(10.0);
        let mut state = OptimizerState::new(OptimizerKind::default(), &layers);
        for _ in 0..4000 {
            let w = layers[0].weights.data[0];
            state.step(&mut layers, &grad(2.0 * (w - 2.0)), 0.01);
        }
        assert!((layers[0].weights.data[0] - 2.0).abs() < 1e-2);
    }
}
