//! The headline audit: compare explainer rankings against necessity and
//! sufficiency. Per test instance, the feature an explainer puts at rank k
//! is scored on that instance (necessity) or with that instance as the
//! reference and the remaining test rows as candidates (sufficiency); means
//! are taken per rank over the whole test set. "Rest" averages the local
//! scores of every feature ranked below 3.

use serde::{Deserialize, Serialize};

use crate::dataset::{feature_grid, Dataset, Group};
use crate::error::{AuditError, Result};
use crate::explain::{Attribution, Explainer};
use crate::model::Classifier;
use crate::scoring::{necessity_local, sufficiency_local, ScoreKind};

pub const RANK_LABELS: [&str; 4] = ["1", "2", "3", "rest"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub rank: String,
    pub mean: f64,
    pub instances: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankScoreTable {
    pub model: String,
    pub setting: String,
    pub explainer: String,
    pub score_kind: ScoreKind,
    pub entries: Vec<RankEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccurrenceTable {
    pub model: String,
    pub setting: String,
    pub explainer: String,
    pub k_list: Vec<usize>,
    pub features: Vec<String>,
    /// counts[f][i] = times feature f appears in the top k_list[i].
    pub counts: Vec<Vec<usize>>,
    /// Mean count over non-high-level features, when group tags exist.
    pub rest_averaged: Option<Vec<f64>>,
    /// Indices of the features folded into the rest average.
    pub rest_features: Vec<usize>,
    pub n_instances: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessVerdict {
    pub means: Vec<f64>,
    /// Adjacent rank positions (0-based into `means`) where the later mean
    /// exceeds the earlier one beyond tolerance.
    pub violations: Vec<(usize, usize)>,
}

impl RobustnessVerdict {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Explain every test instance in index order.
pub fn explain_all<M: Classifier>(
    model: &M,
    explainer: &dyn Explainer,
    test: &Dataset,
) -> Result<Vec<Attribution>> {
    test.rows
        .iter()
        .enumerate()
        .map(|(i, row)| explainer.explain(model, row, i))
        .collect()
}

#[derive(Default)]
struct SlotAcc {
    sum: f64,
    count: usize,
    skipped: usize,
}

impl SlotAcc {
    fn add(&mut self, v: f64) {
        self.sum += v;
        self.count += 1;
    }
}

/// Rank-wise mean scores from precomputed attributions.
pub fn rank_wise_scores_from<M: Classifier + ?Sized>(
    model: &M,
    model_label: &str,
    explainer_label: &str,
    setting_label: &str,
    attributions: &[Attribution],
    test: &Dataset,
    score_kind: ScoreKind,
    grid_n: usize,
) -> Result<RankScoreTable> {
    let d = test.n_features();
    if d < 4 {
        return Err(AuditError::TooFewFeaturesForRanks(d));
    }
    let grids: Vec<Vec<f64>> = test
        .specs
        .iter()
        .map(|s| feature_grid(s, grid_n))
        .collect::<Result<_>>()?;

    let mut slots: [SlotAcc; 4] = Default::default();
    for attr in attributions {
        let i = attr.instance_id;
        let row = &test.rows[i];
        let local = |feature: usize| -> Option<f64> {
            match score_kind {
                ScoreKind::Necessity => {
                    match necessity_local(model, row, feature, &grids[feature], test, i) {
                        Ok(s) => Some(s.value),
                        Err(_) => None,
                    }
                }
                ScoreKind::Sufficiency => {
                    sufficiency_local(model, row, feature, test, Some(i), i).map(|s| s.value)
                }
            }
        };
        for slot in 0..3 {
            match local(attr.ranking[slot]) {
                Some(v) => slots[slot].add(v),
                None => slots[slot].skipped += 1,
            }
        }
        // rest: mean over every feature ranked below 3 for this instance
        let mut sum = 0.0;
        let mut n = 0usize;
        for &feature in &attr.ranking[3..] {
            if let Some(v) = local(feature) {
                sum += v;
                n += 1;
            }
        }
        if n > 0 {
            slots[3].add(sum / n as f64);
        } else {
            slots[3].skipped += 1;
        }
    }

    let entries: Vec<RankEntry> = slots
        .iter()
        .zip(RANK_LABELS)
        .map(|(acc, label)| {
            if acc.count == 0 {
                Err(AuditError::AllLocalsUndefined)
            } else {
                Ok(RankEntry {
                    rank: label.to_string(),
                    mean: acc.sum / acc.count as f64,
                    instances: acc.count,
                    skipped: acc.skipped,
                })
            }
        })
        .collect::<Result<_>>()?;

    Ok(RankScoreTable {
        model: model_label.to_string(),
        setting: setting_label.to_string(),
        explainer: explainer_label.to_string(),
        score_kind,
        entries,
    })
}

/// Convenience wrapper that explains the test set first.
pub fn rank_wise_scores<M: Classifier>(
    model: &M,
    model_label: &str,
    explainer: &dyn Explainer,
    setting_label: &str,
    test: &Dataset,
    score_kind: ScoreKind,
    grid_n: usize,
) -> Result<RankScoreTable> {
    let attrs = explain_all(model, explainer, test)?;
    rank_wise_scores_from(
        model,
        model_label,
        explainer.method_label(),
        setting_label,
        &attrs,
        test,
        score_kind,
        grid_n,
    )
}

/// Top-k occurrence counts from precomputed attributions.
pub fn topk_occurrence_from(
    model_label: &str,
    explainer_label: &str,
    setting_label: &str,
    attributions: &[Attribution],
    test: &Dataset,
    k_list: &[usize],
) -> Result<OccurrenceTable> {
    let d = test.n_features();
    if let Some(&bad) = k_list.iter().find(|&&k| k > d || k == 0) {
        return Err(AuditError::RankOutOfRange { k: bad, d });
    }
    let mut counts = vec![vec![0usize; k_list.len()]; d];
    for attr in attributions {
        for (ki, &k) in k_list.iter().enumerate() {
            for &feature in &attr.ranking[..k] {
                counts[feature][ki] += 1;
            }
        }
    }
    let rest_features: Vec<usize> = test
        .specs
        .iter()
        .filter(|s| s.group == Group::Rest)
        .map(|s| s.index)
        .collect();
    let has_tags = rest_features.len() != d;
    let rest_averaged = if has_tags && !rest_features.is_empty() {
        Some(
            (0..k_list.len())
                .map(|ki| {
                    rest_features.iter().map(|&f| counts[f][ki]).sum::<usize>() as f64
                        / rest_features.len() as f64
                })
                .collect(),
        )
    } else {
        None
    };
    Ok(OccurrenceTable {
        model: model_label.to_string(),
        setting: setting_label.to_string(),
        explainer: explainer_label.to_string(),
        k_list: k_list.to_vec(),
        features: test.feature_names(),
        counts,
        rest_averaged,
        rest_features: if has_tags { rest_features } else { Vec::new() },
        n_instances: attributions.len(),
    })
}

pub fn topk_occurrence<M: Classifier>(
    model: &M,
    model_label: &str,
    explainer: &dyn Explainer,
    setting_label: &str,
    test: &Dataset,
    k_list: &[usize],
) -> Result<OccurrenceTable> {
    let attrs = explain_all(model, explainer, test)?;
    topk_occurrence_from(
        model_label,
        explainer.method_label(),
        setting_label,
        &attrs,
        test,
        k_list,
    )
}

/// Flag every adjacent rank pair whose mean increases beyond `tol`.
pub fn monotonicity_check(table: &RankScoreTable, tol: f64) -> RobustnessVerdict {
    let means: Vec<f64> = table.entries.iter().map(|e| e.mean).collect();
    let violations = means
        .windows(2)
        .enumerate()
        .filter(|(_, pair)| pair[1] > pair[0] + tol)
        .map(|(i, _)| (i, i + 1))
        .collect();
    RobustnessVerdict { means, violations }
}
