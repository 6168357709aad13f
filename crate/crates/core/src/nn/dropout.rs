//! Inverted dropout.
//!
//! During training each unit is zeroed independently with probability
//! `rate` and survivors are scaled by `1/(1−rate)`, which keeps the
//! expected activation unchanged. Inference is a plain pass-through, so a
//! trained network needs no rescaling at prediction time.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::NnError;
use super::linalg::Matrix;

/// Applies dropout to a vector of unit values.
pub fn dropout_apply(
    values: &[f64],
    rate: f64,
    training: bool,
    mask_seed: u64,
) -> Result<Vec<f64>, NnError> {
    validate_rate(rate)?;
    if !training || rate == 0.0 {
        return Ok(values.to_vec());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(mask_seed);
    let keep_scale = 1.0 / (1.0 - rate);
    Ok(values
        .iter()
        .map(|&v| if rng.gen::<f64>() < rate { 0.0 } else { v * keep_scale })
        .collect())
}

pub fn validate_rate(rate: f64) -> Result<(), NnError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NnError::InvalidRate(rate));
    }
    Ok(())
}

/// Per-element multiplier mask for a whole batch: 0 for dropped units,
/// `1/(1−rate)` for kept ones. Draw order is row-major, so the mask is a
/// pure function of `(rng state, shape, rate)`.
pub fn mask_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, rate: f64) -> Matrix {
    let keep_scale = 1.0 / (1.0 - rate);
    let data = (0..rows * cols)
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep_scale })
        .collect();
    Matrix::from_flat(rows, cols, data)
}
