//! Independent ground truth: planted synthetic datasets with known feature
//! relevance, plus brute-force scoring and a permutation-definition Shapley
//! reference. Nothing here calls into the scoring or explainer paths; the
//! enumerations are written from the definitions directly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, FeatureKind, FeatureSpec, Group};
use crate::error::{AuditError, Result};
use crate::model::Classifier;

const ENUMERATION_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelRule {
    LinearThreshold,
    Xor,
    Conjunction,
}

/// Synthetic data with planted feature relevance.
///
/// Features are uniform on [0, 1] when `levels` is `None`, otherwise
/// categorical with `levels` codes (the rule sees code / (levels - 1)).
/// The label rule reads only the `relevant` features; everything else is
/// noise by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedSpec {
    pub d: usize,
    /// (feature index, effect strength), strictly descending strengths.
    pub relevant: Vec<(usize, f64)>,
    pub rule: LabelRule,
    pub noise_rate: f64,
    pub seed: u64,
    #[serde(default)]
    pub levels: Option<usize>,
}

impl PlantedSpec {
    fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(AuditError::InvalidPlantedSpec("d must be positive".into()));
        }
        if self.relevant.is_empty() {
            return Err(AuditError::InvalidPlantedSpec(
                "at least one relevant feature".into(),
            ));
        }
        for &(j, w) in &self.relevant {
            if j >= self.d {
                return Err(AuditError::InvalidPlantedSpec(format!(
                    "relevant index {j} out of range"
                )));
            }
            if w <= 0.0 {
                return Err(AuditError::InvalidPlantedSpec(
                    "effect strengths must be positive".into(),
                ));
            }
        }
        for pair in self.relevant.windows(2) {
            if pair[1].1 >= pair[0].1 {
                return Err(AuditError::InvalidPlantedSpec(
                    "effect strengths must be strictly descending".into(),
                ));
            }
        }
        if !(0.0..=0.3).contains(&self.noise_rate) {
            return Err(AuditError::InvalidPlantedSpec(
                "noise rate must lie in [0, 0.3]".into(),
            ));
        }
        if self.levels == Some(0) || self.levels == Some(1) {
            return Err(AuditError::InvalidPlantedSpec(
                "categorical planting needs at least 2 levels".into(),
            ));
        }
        Ok(())
    }

    /// Noise-free label for a row of rule-space values in [0, 1].
    pub fn clean_label(&self, values: &[f64]) -> u8 {
        match self.rule {
            LabelRule::LinearThreshold => {
                let s: f64 = self
                    .relevant
                    .iter()
                    .map(|&(j, w)| w * (values[j] - 0.5))
                    .sum();
                u8::from(s >= 0.0)
            }
            LabelRule::Xor => {
                let parity = self
                    .relevant
                    .iter()
                    .filter(|&&(j, _)| values[j] >= 0.5)
                    .count();
                (parity % 2) as u8
            }
            LabelRule::Conjunction => {
                u8::from(self.relevant.iter().all(|&(j, _)| values[j] >= 0.5))
            }
        }
    }
}

/// Value a cell contributes to the label rule.
fn rule_value(cell: f64, levels: Option<usize>) -> f64 {
    match levels {
        Some(levels) => cell / (levels - 1) as f64,
        None => cell,
    }
}

pub fn generate_planted(spec: &PlantedSpec, n_rows: usize) -> Result<Dataset> {
    spec.validate()?;
    if n_rows < 50 {
        return Err(AuditError::TooFewRows(n_rows, 50));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::with_capacity(n_rows);
    let mut labels = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let row: Vec<f64> = (0..spec.d)
            .map(|_| match spec.levels {
                Some(levels) => rng.gen_range(0..levels) as f64,
                None => rng.gen_range(0.0..1.0),
            })
            .collect();
        let values: Vec<f64> = row.iter().map(|&c| rule_value(c, spec.levels)).collect();
        let mut label = spec.clean_label(&values);
        if spec.noise_rate > 0.0 && rng.gen_bool(spec.noise_rate) {
            label = 1 - label;
        }
        rows.push(row);
        labels.push(label);
    }

    let specs = (0..spec.d)
        .map(|j| {
            let kind = match spec.levels {
                Some(levels) => FeatureKind::Categorical {
                    codes: (0..levels).map(|c| c.to_string()).collect(),
                },
                None => {
                    let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
                    FeatureKind::Continuous {
                        min: col.iter().cloned().fold(f64::INFINITY, f64::min),
                        max: col.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
                    }
                }
            };
            FeatureSpec {
                name: format!("f{j}"),
                index: j,
                kind,
                group: Group::Rest,
            }
        })
        .collect();

    Ok(Dataset {
        specs,
        rows,
        labels,
        label_names: ["0".into(), "1".into()],
    })
}

/// Exhaustive necessity: fraction of the complete feature domain (minus the
/// original value) on which the prediction differs from the base output.
/// Continuous domains are discretized to `grid_n` points here, independently
/// of `dataset::feature_grid`.
pub fn brute_force_necessity<M: Classifier + ?Sized>(
    model: &M,
    x: &[f64],
    spec: &FeatureSpec,
    grid_n: usize,
) -> Result<f64> {
    let domain: Vec<f64> = match &spec.kind {
        FeatureKind::Categorical { codes } => (0..codes.len()).map(|c| c as f64).collect(),
        FeatureKind::Continuous { min, max } => {
            if min == max {
                vec![*min]
            } else {
                (0..grid_n)
                    .map(|i| min + (max - min) * i as f64 / (grid_n - 1) as f64)
                    .collect()
            }
        }
    };
    if domain.len() > ENUMERATION_BUDGET {
        return Err(AuditError::EnumerationBudget(domain.len()));
    }
    let base = model.predict(x);
    let mut total = 0usize;
    let mut changed = 0usize;
    for &v in &domain {
        let same = if spec.is_categorical() {
            v == x[spec.index]
        } else {
            (v - x[spec.index]).abs() <= 1e-9
        };
        if same {
            continue;
        }
        let mut probe = x.to_vec();
        probe[spec.index] = v;
        total += 1;
        if model.predict(&probe) != base {
            changed += 1;
        }
    }
    if total == 0 {
        return Err(AuditError::EmptyPerturbationSet);
    }
    Ok(changed as f64 / total as f64)
}

/// Exhaustive sufficiency: substitute the reference's value into every
/// opposite-class candidate; `None` when no candidate is opposite-class.
pub fn brute_force_sufficiency<M: Classifier + ?Sized>(
    model: &M,
    r: &[f64],
    feature: usize,
    candidates: &[Vec<f64>],
) -> Option<f64> {
    let target = model.predict(r);
    let mut k = 0usize;
    let mut flipped = 0usize;
    for row in candidates {
        if model.predict(row) == target {
            continue;
        }
        k += 1;
        let mut probe = row.clone();
        probe[feature] = r[feature];
        if model.predict(&probe) == target {
            flipped += 1;
        }
    }
    if k == 0 {
        None
    } else {
        Some(flipped as f64 / k as f64)
    }
}

/// Shapley values by the permutation-average definition: for each ordering
/// of the features, a feature's marginal contribution when it joins the
/// coalition of its predecessors; averaged over all d! orderings for d <= 7
/// and computed by the size-weighted coalition sum for 8 <= d <= 10.
pub fn exact_shapley_reference<M: Classifier + ?Sized>(
    model: &M,
    x: &[f64],
    background: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let d = x.len();
    if d > 10 {
        return Err(AuditError::TooManyFeaturesExact { got: d, max: 10 });
    }

    // value of a coalition given by a membership bitmask
    let value = |mask: u64| -> f64 {
        let mut sum = 0.0;
        for row in background {
            let probe: Vec<f64> = (0..d)
                .map(|j| if mask >> j & 1 == 1 { x[j] } else { row[j] })
                .collect();
            sum += model.predict_proba(&probe);
        }
        sum / background.len() as f64
    };
    let cache: Vec<f64> = (0..1u64 << d).map(value).collect();

    let mut phi = vec![0.0; d];
    if d <= 7 {
        let mut perm: Vec<usize> = (0..d).collect();
        let mut n_perms = 0usize;
        permute(&mut perm, 0, &mut |order: &[usize]| {
            let mut mask = 0u64;
            for &j in order {
                let with = cache[(mask | 1 << j) as usize];
                let without = cache[mask as usize];
                phi[j] += with - without;
                mask |= 1 << j;
            }
            n_perms += 1;
        });
        for p in &mut phi {
            *p /= n_perms as f64;
        }
    } else {
        let fact = |n: usize| -> f64 { (1..=n).map(|i| i as f64).product() };
        for mask in 0..1u64 << d {
            let size = mask.count_ones() as usize;
            let w = fact(size) * fact(d - size - 1) / fact(d);
            for j in 0..d {
                if mask >> j & 1 == 0 {
                    phi[j] += w * (cache[(mask | 1 << j) as usize] - cache[mask as usize]);
                }
            }
        }
    }
    Ok(phi)
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}
