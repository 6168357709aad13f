//! Regression metrics: RMSE, MAE, and the coefficient of determination.
//!
//! MAE comes in two modes. `Standard` is the mean of absolute residuals.
//! `PaperLiteral` is the absolute value of the mean residual (the absolute
//! bias); some hydrology papers print this form, and it diverges from the
//! standard MAE as soon as residuals change sign, so it is kept available
//! for comparison rather than silently corrected.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("length mismatch: {pred} predictions vs {obs} observations")]
    LengthMismatch { pred: usize, obs: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("zero variance in {0}")]
    ZeroVariance(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaeMode {
    Standard,
    PaperLiteral,
}

/// The full metric set for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub rmse: f64,
    pub mae_standard: f64,
    pub mae_paper_literal: f64,
    pub r2: f64,
}

impl EvalMetrics {
    /// Computes all metrics at once.
    pub fn compute(pred: &[f64], obs: &[f64]) -> Result<EvalMetrics, MetricsError> {
        Ok(EvalMetrics {
            rmse: rmse(pred, obs)?,
            mae_standard: mae(pred, obs, MaeMode::Standard)?,
            mae_paper_literal: mae(pred, obs, MaeMode::PaperLiteral)?,
            r2: r2(pred, obs)?,
        })
    }
}

fn check_lengths(pred: &[f64], obs: &[f64]) -> Result<(), MetricsError> {
    if pred.len() != obs.len() {
        return Err(MetricsError::LengthMismatch { pred: pred.len(), obs: obs.len() });
    }
    if pred.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    Ok(())
}

/// Root mean square error `√(Σ(pred−obs)²/n)`.
pub fn rmse(pred: &[f64], obs: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(pred, obs)?;
    let n = pred.len() as f64;
    let sum_sq: f64 = pred.iter().zip(obs).map(|(p, o)| (p - o) * (p - o)).sum();
    Ok((sum_sq / n).sqrt())
}

/// Mean absolute error in the requested mode.
pub fn mae(pred: &[f64], obs: &[f64], mode: MaeMode) -> Result<f64, MetricsError> {
    check_lengths(pred, obs)?;
    let n = pred.len() as f64;
    let value = match mode {
        MaeMode::Standard => pred.iter().zip(obs).map(|(p, o)| (p - o).abs()).sum::<f64>() / n,
        MaeMode::PaperLiteral => {
            (pred.iter().zip(obs).map(|(p, o)| p - o).sum::<f64>() / n).abs()
        }
    };
    Ok(value)
}

/// Coefficient of determination as the squared Pearson correlation:
/// `[Σ(o−ō)(p−p̄)]² / [Σ(o−ō)²·Σ(p−p̄)²]`.
pub fn r2(pred: &[f64], obs: &[f64]) -> Result<f64, MetricsError> {
    check_lengths(pred, obs)?;
    if pred.len() < 2 {
        return Err(MetricsError::EmptyInput);
    }
    let n = pred.len() as f64;
    let pred_mean = pred.iter().sum::<f64>() / n;
    let obs_mean = obs.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_pred = 0.0;
    let mut var_obs = 0.0;
    for (p, o) in pred.iter().zip(obs) {
        let dp = p - pred_mean;
        let do_ = o - obs_mean;
        cov += dp * do_;
        var_pred += dp * dp;
        var_obs += do_ * do_;
    }
    if var_pred == 0.0 {
        return Err(MetricsError::ZeroVariance("predictions"));
    }
    if var_obs == 0.0 {
        return Err(MetricsError::ZeroVariance("observations"));
    }
    Ok(cov * cov / (var_pred * var_obs))
}
