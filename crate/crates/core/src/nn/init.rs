//! Weight initialization.
//!
//! The default scheme picks per layer based on its activation: Glorot
//! uniform for sigmoid/linear, He normal for ReLU, and LeCun normal for
//! SeLU (self-normalization depends on unit fan-in variance). Biases start
//! at zero.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::activation::ActivationKind;
use super::linalg::Matrix;
use super::{Layer, NetworkSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum InitScheme {
    /// Glorot for sigmoid/linear, He for ReLU, LeCun for SeLU.
    #[default]
    PerActivation,
    GlorotUniform,
    HeNormal,
    LeCunNormal,
}

impl InitScheme {
    fn resolve(self, activation: ActivationKind) -> InitScheme {
        match self {
            InitScheme::PerActivation => match activation {
                ActivationKind::Sigmoid | ActivationKind::Linear => InitScheme::GlorotUniform,
                ActivationKind::ReLU => InitScheme::HeNormal,
                ActivationKind::SeLU => InitScheme::LeCunNormal,
            },
            other => other,
        }
    }
}

fn draw_weights(
    rng: &mut ChaCha8Rng,
    scheme: InitScheme,
    fan_in: usize,
    fan_out: usize,
) -> Matrix {
    let n = fan_out * fan_in;
    let data: Vec<f64> = match scheme {
        InitScheme::GlorotUniform => {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            (0..n).map(|_| rng.gen_range(-limit..=limit)).collect()
        }
        InitScheme::HeNormal => {
            let std = (2.0 / fan_in as f64).sqrt();
            (0..n).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect()
        }
        InitScheme::LeCunNormal => {
            let std = (1.0 / fan_in as f64).sqrt();
            (0..n).map(|_| std * rng.sample::<f64, _>(StandardNormal)).collect()
        }
        InitScheme::PerActivation => unreachable!("resolved before drawing"),
    };
    Matrix::from_flat(fan_out, fan_in, data)
}

/// Builds the layer stack for a spec: seeded weights, zero biases.
pub fn init_weights(spec: &NetworkSpec) -> Vec<Layer> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut layers = Vec::with_capacity(spec.hidden.len() + 1);
    let mut fan_in = spec.input_width;
    for hidden in &spec.hidden {
        let scheme = spec.init.resolve(hidden.activation);
        layers.push(Layer {
            weights: draw_weights(&mut rng, scheme, fan_in, hidden.width),
            biases: vec![0.0; hidden.width],
            activation: hidden.activation,
        });
        fan_in = hidden.width;
    }
    let scheme = spec.init.resolve(ActivationKind::Linear);
    layers.push(Layer {
        weights: draw_weights(&mut rng, scheme, fan_in, NetworkSpec::OUTPUT_WIDTH),
        biases: vec![0.0; NetworkSpec::OUTPUT_WIDTH],
        activation: ActivationKind::Linear,
    });
    layers
}
