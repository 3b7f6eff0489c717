//! Local and global necessity / sufficiency scores.
//!
//! Necessity of feature j for an instance: the fraction of single-feature
//! perturbations that flip the model's output. Sufficiency of feature j for
//! a reference: the fraction of opposite-class candidates that flip to the
//! reference's output when j is set to the reference's value. Globals are
//! plain means of locals in ascending instance-index order.

use serde::{Deserialize, Serialize};

use crate::counterfactual::forward_counterfactuals;
use crate::dataset::{feature_grid, Dataset};
use crate::error::{AuditError, Result};
use crate::model::Classifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    Necessity,
    Sufficiency,
}

impl ScoreKind {
    pub fn label(&self) -> &'static str {
        match self {
            ScoreKind::Necessity => "necessity",
            ScoreKind::Sufficiency => "sufficiency",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalScore {
    pub feature: usize,
    /// Instance index (necessity) or reference index (sufficiency).
    pub id: usize,
    pub kind: ScoreKind,
    pub value: f64,
    /// Denominator count: kept counterfactuals, or |K|.
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalScore {
    pub feature: usize,
    pub kind: ScoreKind,
    pub value: f64,
    pub aggregated_over: usize,
    /// Locals that were undefined (empty K) and skipped, never zero-filled.
    pub skipped: usize,
}

/// Fraction of kept counterfactuals on `grid` that flip the model output.
pub fn necessity_local<M: Classifier + ?Sized>(
    model: &M,
    x: &[f64],
    feature: usize,
    grid: &[f64],
    context: &Dataset,
    instance_id: usize,
) -> Result<LocalScore> {
    let cf = forward_counterfactuals(model, x, &context.specs[feature], grid)?;
    Ok(LocalScore {
        feature,
        id: instance_id,
        kind: ScoreKind::Necessity,
        value: cf.flips() as f64 / cf.len() as f64,
        support: cf.len(),
    })
}

/// Sufficiency of feature j with reference `r`. K is the set of candidate
/// rows the model sends to the opposite class of the reference; the score is
/// the fraction of K flipped to the reference's output by setting j to the
/// reference's value. Empty K means the score is undefined (`None`), not 0.
pub fn sufficiency_local<M: Classifier + ?Sized>(
    model: &M,
    r: &[f64],
    feature: usize,
    candidates: &Dataset,
    exclude_row: Option<usize>,
    reference_id: usize,
) -> Option<LocalScore> {
    let target = model.predict(r);
    let a = r[feature];
    let mut support = 0usize;
    let mut flipped = 0usize;
    for (i, row) in candidates.rows.iter().enumerate() {
        if exclude_row == Some(i) {
            continue;
        }
        if model.predict(row) == target {
            continue;
        }
        support += 1;
        let mut probe = row.clone();
        probe[feature] = a;
        if model.predict(&probe) == target {
            flipped += 1;
        }
    }
    if support == 0 {
        return None;
    }
    Some(LocalScore {
        feature,
        id: reference_id,
        kind: ScoreKind::Sufficiency,
        value: flipped as f64 / support as f64,
        support,
    })
}

/// Mean local necessity over the first `limit` context instances (all when
/// `None`), in ascending instance-index order.
pub fn necessity_global<M: Classifier + ?Sized>(
    model: &M,
    context: &Dataset,
    feature: usize,
    grid_n: usize,
    limit: Option<usize>,
) -> Result<GlobalScore> {
    if context.n_rows() == 0 {
        return Err(AuditError::EmptyDataset);
    }
    let grid = feature_grid(&context.specs[feature], grid_n)?;
    let n = limit
        .unwrap_or(context.n_rows())
        .min(context.n_rows());
    let mut sum = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for i in 0..n {
        match necessity_local(model, &context.rows[i], feature, &grid, context, i) {
            Ok(local) => {
                sum += local.value.abs();
                used += 1;
            }
            Err(AuditError::EmptyPerturbationSet) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if used == 0 {
        return Err(AuditError::AllLocalsUndefined);
    }
    Ok(GlobalScore {
        feature,
        kind: ScoreKind::Necessity,
        value: sum / used as f64,
        aggregated_over: used,
        skipped,
    })
}

/// Mean local sufficiency over the first `limit` references drawn from the
/// context (all when `None`); undefined locals are skipped and counted.
pub fn sufficiency_global<M: Classifier + ?Sized>(
    model: &M,
    context: &Dataset,
    feature: usize,
    limit: Option<usize>,
) -> Result<GlobalScore> {
    if context.n_rows() == 0 {
        return Err(AuditError::EmptyDataset);
    }
    let preds: Vec<u8> = context.rows.iter().map(|r| model.predict(r)).collect();
    if preds.iter().all(|&p| p == preds[0]) {
        return Err(AuditError::SingleClassContext);
    }
    let n = limit
        .unwrap_or(context.n_rows())
        .min(context.n_rows());
    let mut sum = 0.0;
    let mut used = 0usize;
    let mut skipped = 0usize;
    for i in 0..n {
        match sufficiency_local(model, &context.rows[i], feature, context, None, i) {
            Some(local) => {
                sum += local.value.abs();
                used += 1;
            }
            None => skipped += 1,
        }
    }
    if used == 0 {
        return Err(AuditError::AllLocalsUndefined);
    }
    Ok(GlobalScore {
        feature,
        kind: ScoreKind::Sufficiency,
        value: sum / used as f64,
        aggregated_over: used,
        skipped,
    })
}
