//! Forward counterfactual generation: single-feature perturbation sweeps
//! with model responses. Deterministic, no randomness.

use crate::dataset::FeatureSpec;
use crate::error::{AuditError, Result};
use crate::model::Classifier;

/// Tolerance for "perturbed value differs from the original" on continuous
/// features; categorical codes compare exactly.
pub const VALUE_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct CounterfactualSet {
    pub base: Vec<f64>,
    pub base_output: u8,
    pub feature: usize,
    pub values: Vec<f64>,
    pub predictions: Vec<u8>,
    /// Grid values dropped for coinciding with the base value.
    pub excluded_count: usize,
}

impl CounterfactualSet {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Count of counterfactuals whose prediction differs from the base output.
    pub fn flips(&self) -> usize {
        self.predictions
            .iter()
            .filter(|&&p| p != self.base_output)
            .count()
    }
}

/// For each grid value differing from the instance's current value at
/// feature `j`, clone the instance, substitute, and record the model's
/// hard-label response. Every member differs from the base at exactly one
/// feature and every value lies in the train-observed domain.
pub fn forward_counterfactuals<M: Classifier + ?Sized>(
    model: &M,
    x: &[f64],
    spec: &FeatureSpec,
    grid: &[f64],
) -> Result<CounterfactualSet> {
    let j = spec.index;
    let a = x[j];
    let base_output = model.predict(x);

    let mut values = Vec::with_capacity(grid.len());
    let mut predictions = Vec::with_capacity(grid.len());
    let mut excluded_count = 0;
    let mut probe = x.to_vec();
    for &v in grid {
        let same = if spec.is_categorical() {
            v == a
        } else {
            (v - a).abs() <= VALUE_EPS
        };
        if same {
            excluded_count += 1;
            continue;
        }
        probe[j] = v;
        values.push(v);
        predictions.push(model.predict(&probe));
    }
    if values.is_empty() {
        return Err(AuditError::EmptyPerturbationSet);
    }

    Ok(CounterfactualSet {
        base: x.to_vec(),
        base_output,
        feature: j,
        values,
        predictions,
        excluded_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureKind, Group};
    use crate::testutil::ThresholdModel;

    fn cont_spec(index: usize) -> FeatureSpec {
        FeatureSpec {
            name: format!("f{index}"),
            index,
            kind: FeatureKind::Continuous { min: 0.0, max: 1.0 },
            group: Group::Rest,
        }
    }

    #[test]
    fn threshold_sweep_matches_enumeration() {
        let m = ThresholdModel { feature: 0, threshold: 0.5, n: 2 };
        let grid: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
        let cf = forward_counterfactuals(&m, &[0.7, 0.3], &cont_spec(0), &grid).unwrap();
        assert_eq!(cf.len(), 10);
        assert_eq!(cf.excluded_count, 0);
        assert_eq!(cf.base_output, 1);
        let zeros = cf.predictions.iter().filter(|&&p| p == 0).count();
        assert_eq!(zeros, 5);
        assert_eq!(cf.flips(), 5);
    }

    #[test]
    fn ignored_feature_never_flips() {
        let m = ThresholdModel { feature: 0, threshold: 0.5, n: 2 };
        let grid: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
        let cf = forward_counterfactuals(&m, &[0.7, 0.3], &cont_spec(1), &grid).unwrap();
        assert!(cf.predictions.iter().all(|&p| p == cf.base_output));
    }

    #[test]
    fn coinciding_value_is_excluded() {
        let m = ThresholdModel { feature: 0, threshold: 0.5, n: 2 };
        let grid = vec![0.0, 0.7, 1.0];
        let cf = forward_counterfactuals(&m, &[0.7, 0.3], &cont_spec(0), &grid).unwrap();
        assert_eq!(cf.excluded_count, 1);
        assert_eq!(cf.values, vec![0.0, 1.0]);
    }

    #[test]
    fn degenerate_categorical_domain_errors() {
        let spec = FeatureSpec {
            name: "c".into(),
            index: 0,
            kind: FeatureKind::Categorical { codes: vec!["A".into()] },
            group: Group::Rest,
        };
        let m = ThresholdModel { feature: 0, threshold: 0.5, n: 1 };
        let err = forward_counterfactuals(&m, &[0.0], &spec, &[0.0]).unwrap_err();
        assert!(matches!(err, AuditError::EmptyPerturbationSet));
    }
}
