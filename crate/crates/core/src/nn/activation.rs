//! Activation functions and their derivatives.

use serde::{Deserialize, Serialize};

/// SeLU scale constant λ.
pub const SELU_LAMBDA: f64 = 1.05070098;
/// SeLU shape constant α.
pub const SELU_ALPHA: f64 = 1.67326324;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActivationKind {
    Sigmoid,
    ReLU,
    SeLU,
    Linear,
}

impl ActivationKind {
    /// Applies the activation to a pre-activation value.
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            ActivationKind::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            ActivationKind::ReLU => x.max(0.0),
            ActivationKind::SeLU => {
                if x > 0.0 {
                    SELU_LAMBDA * x
                } else {
                    SELU_LAMBDA * SELU_ALPHA * (x.exp() - 1.0)
                }
            }
            ActivationKind::Linear => x,
        }
    }

    /// Derivative with respect to the pre-activation. At x = 0 the ReLU and
    /// SeLU kinks take the x ≤ 0 branch.
    #[inline]
    pub fn derivative(self, x: f64) -> f64 {
        match self {
            ActivationKind::Sigmoid => {
                let s = 1.0 / (1.0 + (-x).exp());
                s * (1.0 - s)
            }
            ActivationKind::ReLU => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::SeLU => {
                if x > 0.0 {
                    SELU_LAMBDA
                } else {
                    SELU_LAMBDA * SELU_ALPHA * x.exp()
                }
            }
            ActivationKind::Linear => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::ReLU => "relu",
            ActivationKind::SeLU => "selu",
            ActivationKind::Linear => "linear",
        }
    }

    pub fn parse(name: &str) -> Option<ActivationKind> {
        match name.to_ascii_lowercase().as_str() {
            "sigmoid" => Some(ActivationKind::Sigmoid),
            "relu" => Some(ActivationKind::ReLU),
            "selu" => Some(ActivationKind::SeLU),
            "linear" => Some(ActivationKind::Linear),
            _ => None,
        }
    }
}

/// Convenience free function mirroring the enum method.
pub fn activate(kind: ActivationKind, x: f64) -> f64 {
    kind.apply(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_symmetry_point() {
        assert_eq!(activate(ActivationKind::Sigmoid, 0.0), 0.5);
        assert!((activate(ActivationKind::Sigmoid, 4.0)
            + activate(ActivationKind::Sigmoid, -4.0)
            - 1.0)
            .abs()
            < 1e-12);
    }

    #[test]
    fn relu_branches() {
        assert_eq!(activate(ActivationKind::ReLU, 3.5), 3.5);
        assert_eq!(activate(ActivationKind::ReLU, -3.5), 0.0);
        assert_eq!(activate(ActivationKind::ReLU, 0.0), 0.0);
    }

    #[test]
    fn selu_constants_exact() {
        assert_eq!(SELU_ALPHA, 1.67326324);
        assert_eq!(SELU_LAMBDA, 1.05070098);
        assert_eq!(activate(ActivationKind::SeLU, 1.0), 1.05070098);
    }

    #[test]
    fn selu_negative_tail() {
        // λ·α·(e^-10 − 1), approaching the −λα asymptote.
        let v = activate(ActivationKind::SeLU, -10.0);
        assert!((v - (-1.7580195084800563)).abs() < 1e-4, "got {v}");
        assert!(v > -SELU_LAMBDA * SELU_ALPHA);
    }

    #[test]
    fn kink_derivatives_use_left_branch() {
        assert_eq!(ActivationKind::ReLU.derivative(0.0), 0.0);
        assert_eq!(ActivationKind::SeLU.derivative(0.0), SELU_LAMBDA * SELU_ALPHA);
        assert_eq!(ActivationKind::Linear.derivative(123.0), 1.0);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-6;
        for kind in [ActivationKind::Sigmoid, ActivationKind::SeLU, ActivationKind::Linear] {
            for &x in &[-2.0, -0.5, 0.3, 1.7] {
                let numeric = (kind.apply(x + h) - kind.apply(x - h)) / (2.0 * h);
                let analytic = kind.derivative(x);
                assert!(
                    (numeric - analytic).abs() < 1e-6,
                    "{kind:?} at {x}: {numeric} vs {analytic}"
                );
            }
        }
    }
}
