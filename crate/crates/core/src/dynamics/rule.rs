//! Learning rules `Γ` driving the coupling dynamics.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// A 2π-periodic, continuously differentiable learning rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum LearningRule {
    /// `Γ(s) = cos(s)`.
    #[serde(alias = "cos", alias = "hebbian")]
    HebbianCos,
    /// `Γ(s) = -cos(s)`, the anti-Hebbian counterpart.
    #[serde(alias = "anti-hebbian")]
    NegCos,
    /// `Γ(s) = cos(s + alpha)`.
    ShiftedCos { alpha: f64 },
    /// `Γ(s) = constant + Σ_k cos[k-1]·cos(k s) + sin[k-1]·sin(k s)`.
    CustomFourier {
        #[serde(default)]
        constant: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

impl LearningRule {
    pub fn value(&self, s: f64) -> f64 {
        match self {
            Self::HebbianCos => s.cos(),
            Self::NegCos => -s.cos(),
            Self::ShiftedCos { alpha } => (s + alpha).cos(),
            Self::CustomFourier { constant, cos, sin } => {
                let mut v = *constant;
                for (k, (a, b)) in harmonics(cos, sin) {
                    let (sk, ck) = (k * s).sin_cos();
                    v += a * ck + b * sk;
                }
                v
            }
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            Self::HebbianCos => -s.sin(),
            Self::NegCos => s.sin(),
            Self::ShiftedCos { alpha } => -(s + alpha).sin(),
            Self::CustomFourier { cos, sin, .. } => {
                let mut v = 0.0;
                for (k, (a, b)) in harmonics(cos, sin) {
                    let (sk, ck) = (k * s).sin_cos();
                    v += k * (b * ck - a * sk);
                }
                v
            }
        }
    }

    /// `Γ(0)`; its sign decides the stability test for the intra-cluster errors.
    pub fn at_zero(&self) -> f64 {
        self.value(0.0)
    }

    /// `δ = max(sup|Γ|, sup|Γ'|)`. Exact for the cosine rules; for Fourier
    /// rules the triangle-inequality bound on both suprema.
    pub fn delta(&self) -> f64 {
        match self {
            Self::HebbianCos | Self::NegCos | Self::ShiftedCos { .. } => 1.0,
            Self::CustomFourier { constant, cos, sin } => {
                let mut sup = constant.abs();
                let mut sup_d = 0.0;
                for (k, (a, b)) in harmonics(cos, sin) {
                    let amp = a.hypot(b);
                    sup += amp;
                    sup_d += k * amp;
                }
                f64::max(sup, sup_d)
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::HebbianCos => "hebbian-cos".into(),
            Self::NegCos => "neg-cos".into(),
            Self::ShiftedCos { alpha } => format!("shifted-cos({alpha})"),
            Self::CustomFourier { .. } => "custom-fourier".into(),
        }
    }

    /// `-Γ`, used by sign-flip checks.
    pub fn negated(&self) -> Self {
        match self {
            Self::HebbianCos => Self::NegCos,
            Self::NegCos => Self::HebbianCos,
            Self::ShiftedCos { alpha } => Self::ShiftedCos { alpha: alpha + PI },
            Self::CustomFourier { constant, cos, sin } => Self::CustomFourier {
                constant: -constant,
                cos: cos.iter().map(|x| -x).collect(),
                sin: sin.iter().map(|x| -x).collect(),
            },
        }
    }
}

fn harmonics<'a>(cos: &'a [f64], sin: &'a [f64]) -> impl Iterator<Item = (f64, (f64, f64))> + 'a {
    let n = cos.len().max(sin.len());
    (0..n).map(move |i| {
        let a = cos.get(i).copied().unwrap_or(0.0);
        let b = sin.get(i).copied().unwrap_or(0.0);
        ((i + 1) as f64, (a, b))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn rules() -> Vec<LearningRule> {
        vec![
            LearningRule::HebbianCos,
            LearningRule::NegCos,
            LearningRule::ShiftedCos { alpha: 0.3 },
            LearningRule::CustomFourier {
                constant: 0.2,
                cos: vec![0.5, -0.1],
                sin: vec![0.0, 0.3, 0.05],
            },
            LearningRule::CustomFourier {
                constant: 0.0,
                cos: vec![],
                sin: vec![],
            },
        ]
    }

    #[test]
    fn periodic_and_delta_bounds() {
        for rule in rules() {
            let mut sup: f64 = 0.0;
            for k in 0..4096 {
                let s = -PI + TAU * k as f64 / 4096.0;
                assert!((rule.value(s + TAU) - rule.value(s)).abs() < 1e-12);
                assert!((rule.derivative(s + TAU) - rule.derivative(s)).abs() < 1e-12);
                sup = sup.max(rule.value(s).abs()).max(rule.derivative(s).abs());
            }
            assert!(rule.delta() >= sup - 1e-12, "{rule:?}");
        }
    }

    #[test]
    fn derivative_matches_central_difference() {
        let h = 1e-6;
        for rule in rules() {
            for k in 0..50 {
                let s = -3.0 + 0.12 * k as f64;
                let fd = (rule.value(s + h) - rule.value(s - h)) / (2.0 * h);
                assert!((fd - rule.derivative(s)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn values_at_zero() {
        assert_eq!(LearningRule::HebbianCos.at_zero(), 1.0);
        assert_eq!(LearningRule::NegCos.at_zero(), -1.0);
        assert_eq!(LearningRule::HebbianCos.delta(), 1.0);
        let zero = LearningRule::CustomFourier {
            constant: 0.0,
            cos: vec![0.0],
            sin: vec![0.0],
        };
        assert_eq!(zero.at_zero(), 0.0);
        assert_eq!(zero.delta(), 0.0);
    }

    #[test]
    fn negation_flips_sign() {
        for rule in rules() {
            let neg = rule.negated();
            for s in [-2.0, 0.0, 0.7, 3.0] {
                assert!((neg.value(s) + rule.value(s)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parses_config_forms() {
        let r: LearningRule = serde_json::from_str(r#"{"type":"hebbian-cos"}"#).unwrap();
        assert_eq!(r, LearningRule::HebbianCos);
        let r: LearningRule = serde_json::from_str(r#"{"type":"neg-cos"}"#).unwrap();
        assert_eq!(r, LearningRule::NegCos);
        let r: LearningRule =
            serde_json::from_str(r#"{"type":"custom-fourier","cos":[1.0]}"#).unwrap();
        assert_eq!(r.at_zero(), 1.0);
    }
}
