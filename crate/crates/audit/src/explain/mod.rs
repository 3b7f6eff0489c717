//! Feature-attribution explainers: a LIME-style local surrogate and a
//! Shapley-value estimator. Both attribute the probability output; the
//! scoring side works on hard labels.

mod lime;
mod shap;

pub use lime::{explain_lime, LimeConfig, LimeExplainer};
pub use shap::{explain_shap, ShapConfig, ShapExplainer, ShapMode};

use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};
use crate::model::Classifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lime,
    Shap,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Lime => "lime",
            Method::Shap => "shap",
        }
    }
}

/// Per-instance attribution: signed per-feature scores plus the ranking by
/// descending |score|, ties broken by ascending feature index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub instance_id: usize,
    pub method: Method,
    pub scores: Vec<f64>,
    pub ranking: Vec<usize>,
}

impl Attribution {
    pub fn new(instance_id: usize, method: Method, scores: Vec<f64>) -> Attribution {
        let ranking = rank_by_magnitude(&scores);
        Attribution {
            instance_id,
            method,
            scores,
            ranking,
        }
    }
}

/// Indices sorted by |score| descending; equal magnitudes keep ascending
/// feature index order.
pub fn rank_by_magnitude(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| {
        scores[b]
            .abs()
            .total_cmp(&scores[a].abs())
            .then(a.cmp(&b))
    });
    idx
}

/// Resolve the top-k ranked features to names; the remainder is the rest
/// group.
pub fn rank_top_k(
    attribution: &Attribution,
    names: &[String],
    k: usize,
) -> Result<(Vec<String>, Vec<String>)> {
    let d = attribution.ranking.len();
    if k < 1 || k > d {
        return Err(AuditError::RankOutOfRange { k, d });
    }
    let top = attribution.ranking[..k]
        .iter()
        .map(|&j| names[j].clone())
        .collect();
    let rest = attribution.ranking[k..]
        .iter()
        .map(|&j| names[j].clone())
        .collect();
    Ok((top, rest))
}

/// A configured explainer producing attributions for single instances.
pub trait Explainer: Sync {
    fn method_label(&self) -> &str;

    fn explain(&self, model: &dyn Classifier, x: &[f64], instance_id: usize)
        -> Result<Attribution>;
}

/// Per-instance RNG substream so instances can be explained in parallel yet
/// deterministically.
pub(crate) fn substream(seed: u64, instance_id: usize) -> u64 {
    seed ^ (instance_id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}
