//! The four classifier families behind one prediction interface.
//!
//! Continuous features are standardized on train statistics; categorical
//! features are one-hot encoded for the logistic and naive Bayes models and
//! used natively by forest splits. The encoding is invisible at the
//! interface: instances stay in the original feature space.

mod forest;
mod logistic;
mod naive_bayes;

pub use forest::ForestParams;
pub use logistic::LogisticParams;
pub use naive_bayes::GnbParams;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureKind};
use crate::error::{AuditError, Result};

/// Anything that maps an instance row to a probability of label 1.
/// A probability tie at exactly 0.5 predicts label 1.
pub trait Classifier: Sync {
    fn predict_proba(&self, x: &[f64]) -> f64;

    fn predict(&self, x: &[f64]) -> u8 {
        u8::from(self.predict_proba(x) >= 0.5)
    }

    fn n_features(&self) -> usize;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum ModelKind {
    LogisticRegression,
    GaussianNb,
    RandomForest,
    /// Soft voting over (LR, GNB, RF) probabilities.
    Voting { weights: [f64; 3] },
}

impl ModelKind {
    pub fn label(&self) -> &'static str {
        match self {
            ModelKind::LogisticRegression => "logistic_regression",
            ModelKind::GaussianNb => "gaussian_nb",
            ModelKind::RandomForest => "random_forest",
            ModelKind::Voting { .. } => "voting",
        }
    }
}

/// Per-feature encoding derived from the train set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureEncoding {
    /// (mean, stddev) on train; stddev 0 replaced by 1.
    Standardized { mean: f64, std: f64 },
    /// One-hot over `n_codes` category codes.
    OneHot { n_codes: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub features: Vec<FeatureEncoding>,
}

impl Encoder {
    pub fn fit(data: &Dataset) -> Encoder {
        let n = data.n_rows() as f64;
        let features = data
            .specs
            .iter()
            .map(|spec| match &spec.kind {
                FeatureKind::Continuous { .. } => {
                    let col: Vec<f64> = data.rows.iter().map(|r| r[spec.index]).collect();
                    let mean = col.iter().sum::<f64>() / n;
                    let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                    let std = if var > 0.0 { var.sqrt() } else { 1.0 };
                    FeatureEncoding::Standardized { mean, std }
                }
                FeatureKind::Categorical { codes } => FeatureEncoding::OneHot {
                    n_codes: codes.len(),
                },
            })
            .collect();
        Encoder { features }
    }

    pub fn encoded_len(&self) -> usize {
        self.features
            .iter()
            .map(|f| match f {
                FeatureEncoding::Standardized { .. } => 1,
                FeatureEncoding::OneHot { n_codes } => *n_codes,
            })
            .sum()
    }

    pub fn encode(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.encoded_len());
        for (enc, &v) in self.features.iter().zip(x) {
            match enc {
                FeatureEncoding::Standardized { mean, std } => out.push((v - mean) / std),
                FeatureEncoding::OneHot { n_codes } => {
                    let code = v as usize;
                    for c in 0..*n_codes {
                        out.push(if c == code { 1.0 } else { 0.0 });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ModelParams {
    Logistic(LogisticParams),
    Gnb(GnbParams),
    Forest(ForestParams),
    Voting {
        weights: [f64; 3],
        lr: LogisticParams,
        gnb: GnbParams,
        forest: ForestParams,
    },
}

/// Persistence format version; bump on any layout change.
const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub version: u32,
    pub kind: ModelKind,
    pub encoder: Encoder,
    pub params: ModelParams,
    pub seed: u64,
}

/// Fit a classifier on the train set. Errors if only one class is present.
pub fn train(kind: ModelKind, train_data: &Dataset, seed: u64) -> Result<TrainedModel> {
    if train_data.n_rows() == 0 {
        return Err(AuditError::EmptyDataset);
    }
    let has0 = train_data.labels.iter().any(|&l| l == 0);
    let has1 = train_data.labels.iter().any(|&l| l == 1);
    if !(has0 && has1) {
        return Err(AuditError::SingleClassTraining);
    }
    let encoder = Encoder::fit(train_data);
    let encoded: Vec<Vec<f64>> = train_data.rows.iter().map(|r| encoder.encode(r)).collect();

    let params = match &kind {
        ModelKind::LogisticRegression => {
            ModelParams::Logistic(logistic::fit(&encoded, &train_data.labels))
        }
        ModelKind::GaussianNb => ModelParams::Gnb(naive_bayes::fit(&encoded, &train_data.labels)),
        ModelKind::RandomForest => ModelParams::Forest(forest::fit(train_data, seed)),
        ModelKind::Voting { weights } => {
            if weights.iter().any(|&w| w < 0.0) || weights.iter().all(|&w| w == 0.0) {
                return Err(AuditError::InvalidConfig(
                    "voting weights must be non-negative and not all zero".into(),
                ));
            }
            ModelParams::Voting {
                weights: *weights,
                lr: logistic::fit(&encoded, &train_data.labels),
                gnb: naive_bayes::fit(&encoded, &train_data.labels),
                forest: forest::fit(train_data, seed),
            }
        }
    };

    Ok(TrainedModel {
        version: MODEL_FORMAT_VERSION,
        kind,
        encoder,
        params,
        seed,
    })
}

impl TrainedModel {
    fn proba_unchecked(&self, x: &[f64]) -> f64 {
        match &self.params {
            ModelParams::Logistic(p) => p.predict_proba(&self.encoder.encode(x)),
            ModelParams::Gnb(p) => p.predict_proba(&self.encoder.encode(x)),
            ModelParams::Forest(p) => p.predict_proba(x),
            ModelParams::Voting {
                weights,
                lr,
                gnb,
                forest,
            } => {
                let enc = self.encoder.encode(x);
                let probs = [
                    lr.predict_proba(&enc),
                    gnb.predict_proba(&enc),
                    forest.predict_proba(x),
                ];
                let wsum: f64 = weights.iter().sum();
                weights.iter().zip(probs).map(|(w, p)| w * p).sum::<f64>() / wsum
            }
        }
    }

    pub fn check_dims(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n_features() {
            return Err(AuditError::DimensionMismatch {
                got: x.len(),
                expected: self.n_features(),
            });
        }
        Ok(())
    }

    pub fn try_predict_proba(&self, x: &[f64]) -> Result<f64> {
        self.check_dims(x)?;
        Ok(self.proba_unchecked(x))
    }

    pub fn try_predict(&self, x: &[f64]) -> Result<u8> {
        Ok(u8::from(self.try_predict_proba(x)? >= 0.5))
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<TrainedModel> {
        if !path.exists() {
            return Err(AuditError::MissingFile(path.to_path_buf()));
        }
        let model: TrainedModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if model.version != MODEL_FORMAT_VERSION {
            return Err(AuditError::PersistenceFormat(format!(
                "version {} unsupported (expected {})",
                model.version, MODEL_FORMAT_VERSION
            )));
        }
        Ok(model)
    }
}

impl Classifier for TrainedModel {
    fn predict_proba(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n_features(), "feature dimension mismatch");
        self.proba_unchecked(x)
    }

    fn n_features(&self) -> usize {
        self.encoder.features.len()
    }
}

/// Mean of 1[predict = label] over the dataset.
pub fn evaluate_accuracy(model: &TrainedModel, data: &Dataset) -> Result<f64> {
    if data.n_rows() == 0 {
        return Err(AuditError::EmptyDataset);
    }
    let mut hits = 0usize;
    for (row, &label) in data.rows.iter().zip(&data.labels) {
        if model.try_predict(row)? == label {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.n_rows() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureSpec, Group};

    pub(crate) fn make_dataset(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> Dataset {
        let d = rows[0].len();
        let specs = (0..d)
            .map(|j| {
                let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
                FeatureSpec {
                    name: format!("f{j}"),
                    index: j,
                    kind: FeatureKind::Continuous {
                        min: col.iter().cloned().fold(f64::INFINITY, f64::min),
                        max: col.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    },
                    group: Group::Rest,
                }
            })
            .collect();
        Dataset {
            specs,
            rows,
            labels,
            label_names: ["0".into(), "1".into()],
        }
    }

    fn separable() -> Dataset {
        // label = 1 iff f0 > 2; widely separated clusters
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..20 {
            rows.push(vec![i as f64 * 0.05, (i % 3) as f64]);
            labels.push(0);
            rows.push(vec![4.0 + i as f64 * 0.05, (i % 5) as f64]);
            labels.push(1);
        }
        make_dataset(rows, labels)
    }

    #[test]
    fn logistic_separates_separable_data() {
        let d = separable();
        let m = train(ModelKind::LogisticRegression, &d, 0).unwrap();
        assert_eq!(evaluate_accuracy(&m, &d).unwrap(), 1.0);
    }

    #[test]
    fn forest_memorizes_train_set() {
        let d = separable();
        let m = train(ModelKind::RandomForest, &d, 0).unwrap();
        assert_eq!(evaluate_accuracy(&m, &d).unwrap(), 1.0);
    }

    #[test]
    fn single_class_training_errors() {
        let d = make_dataset(vec![vec![0.0], vec![1.0]], vec![1, 1]);
        assert!(matches!(
            train(ModelKind::LogisticRegression, &d, 0),
            Err(AuditError::SingleClassTraining)
        ));
    }

    #[test]
    fn dimension_mismatch_errors() {
        let d = separable();
        let m = train(ModelKind::GaussianNb, &d, 0).unwrap();
        assert!(matches!(
            m.try_predict(&[1.0, 2.0, 3.0]),
            Err(AuditError::DimensionMismatch { got: 3, expected: 2 })
        ));
    }

    #[test]
    fn voting_weighted_mean_and_unanimity() {
        let d = separable();
        let m = train(
            ModelKind::Voting {
                weights: [1.0, 5.0, 1.0],
            },
            &d,
            0,
        )
        .unwrap();
        // far inside the class-1 cluster all three sub-models agree
        assert_eq!(m.try_predict(&[4.5, 1.0]).unwrap(), 1);
        assert_eq!(m.try_predict(&[0.1, 1.0]).unwrap(), 0);
    }

    #[test]
    fn voting_weights_on_lr_only_reproduce_lr() {
        let d = separable();
        let lr = train(ModelKind::LogisticRegression, &d, 0).unwrap();
        let v = train(
            ModelKind::Voting {
                weights: [1.0, 0.0, 0.0],
            },
            &d,
            0,
        )
        .unwrap();
        for row in &d.rows {
            assert_eq!(lr.try_predict(row).unwrap(), v.try_predict(row).unwrap());
            assert!(
                (lr.try_predict_proba(row).unwrap() - v.try_predict_proba(row).unwrap()).abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn retraining_is_bit_identical() {
        let d = separable();
        for kind in [
            ModelKind::LogisticRegression,
            ModelKind::GaussianNb,
            ModelKind::RandomForest,
        ] {
            let a = train(kind.clone(), &d, 42).unwrap();
            let b = train(kind, &d, 42).unwrap();
            for row in &d.rows {
                assert_eq!(
                    a.try_predict_proba(row).unwrap().to_bits(),
                    b.try_predict_proba(row).unwrap().to_bits()
                );
            }
        }
    }

    #[test]
    fn persistence_round_trip_is_exact() {
        let d = separable();
        let m = train(ModelKind::RandomForest, &d, 9).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        m.save_json(f.path()).unwrap();
        let m2 = TrainedModel::load_json(f.path()).unwrap();
        for row in &d.rows {
            assert_eq!(
                m.try_predict_proba(row).unwrap().to_bits(),
                m2.try_predict_proba(row).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn predict_agrees_with_threshold_on_proba() {
        let d = separable();
        for kind in [
            ModelKind::LogisticRegression,
            ModelKind::GaussianNb,
            ModelKind::RandomForest,
            ModelKind::Voting {
                weights: [1.0, 5.0, 1.0],
            },
        ] {
            let m = train(kind, &d, 1).unwrap();
            for row in &d.rows {
                let p = m.try_predict_proba(row).unwrap();
                assert!((0.0..=1.0).contains(&p));
                assert_eq!(m.try_predict(row).unwrap(), u8::from(p >= 0.5));
            }
        }
    }
}
