//! Small analytic classifiers used as fixtures by the test suites.

use crate::model::Classifier;

/// 1[x[feature] >= threshold].
pub struct ThresholdModel {
    pub feature: usize,
    pub threshold: f64,
    pub n: usize,
}

impl Classifier for ThresholdModel {
    fn predict_proba(&self, x: &[f64]) -> f64 {
        if x[self.feature] >= self.threshold {
            1.0
        } else {
            0.0
        }
    }

    fn n_features(&self) -> usize {
        self.n
    }
}

/// Probability output intercept + Σ coef·x, clamped to [0, 1].
pub struct LinearProbaModel {
    pub intercept: f64,
    pub coefs: Vec<f64>,
}

impl Classifier for LinearProbaModel {
    fn predict_proba(&self, x: &[f64]) -> f64 {
        let z = self.intercept
            + self
                .coefs
                .iter()
                .zip(x)
                .map(|(c, v)| c * v)
                .sum::<f64>();
        z.clamp(0.0, 1.0)
    }

    fn n_features(&self) -> usize {
        self.coefs.len()
    }
}

/// Always outputs the same probability.
pub struct ConstantModel {
    pub proba: f64,
    pub n: usize,
}

impl Classifier for ConstantModel {
    fn predict_proba(&self, _x: &[f64]) -> f64 {
        self.proba
    }

    fn n_features(&self) -> usize {
        self.n
    }
}

/// 1[x1 > t XOR x2 > t] on the first two features.
pub struct XorModel {
    pub threshold: f64,
    pub n: usize,
}

impl Classifier for XorModel {
    fn predict_proba(&self, x: &[f64]) -> f64 {
        let a = x[0] > self.threshold;
        let b = x[1] > self.threshold;
        if a ^ b {
            1.0
        } else {
            0.0
        }
    }

    fn n_features(&self) -> usize {
        self.n
    }
}
