//! Shapley-value attribution over a background sample.
//!
//! The value of a coalition S is the mean model probability on hybrid
//! instances taking the explained instance's values on S and a background
//! row's values elsewhere. Exact mode enumerates all 2^d coalitions; kernel
//! mode solves the Shapley-kernel weighted least squares, enumerating every
//! proper coalition when the budget allows and sampling otherwise.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{substream, Attribution, Explainer, Method};
use crate::dataset::Dataset;
use crate::error::{AuditError, Result};
use crate::linalg;
use crate::model::Classifier;

pub const EXACT_MAX_FEATURES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapMode {
    Exact,
    Kernel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapConfig {
    #[serde(default = "default_mode")]
    pub mode: ShapMode,
    #[serde(default = "default_coalitions")]
    pub coalitions: usize,
    #[serde(default = "default_background_size")]
    pub background_size: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_mode() -> ShapMode {
    ShapMode::Kernel
}

fn default_coalitions() -> usize {
    2048
}

fn default_background_size() -> usize {
    100
}

impl Default for ShapConfig {
    fn default() -> Self {
        ShapConfig {
            mode: ShapMode::Kernel,
            coalitions: 2048,
            background_size: 100,
            seed: 0,
        }
    }
}

/// Sample up to `background_size` background rows (all of them if fewer).
fn sample_background(background: &Dataset, size: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    if background.n_rows() <= size {
        return background.rows.clone();
    }
    let mut idx: Vec<usize> = (0..background.n_rows()).collect();
    idx.shuffle(rng);
    idx.truncate(size);
    idx.sort_unstable();
    idx.iter().map(|&i| background.rows[i].clone()).collect()
}

/// Coalition value: mean probability over the background of the hybrid
/// instance (coalition members from `x`, the rest from the background row).
fn coalition_value<M: Classifier + ?Sized>(
    model: &M,
    x: &[f64],
    bg: &[Vec<f64>],
    mask: u64,
) -> f64 {
    let d = x.len();
    let mut sum = 0.0;
    let mut probe = vec![0.0; d];
    for row in bg {
        for j in 0..d {
            probe[j] = if mask >> j & 1 == 1 { x[j] } else { row[j] };
        }
        sum += model.predict_proba(&probe);
    }
    sum / bg.len() as f64
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn exact_shapley<M: Classifier + ?Sized>(model: &M, x: &[f64], bg: &[Vec<f64>]) -> Vec<f64> {
    let d = x.len();
    let n_masks = 1usize << d;
    let values: Vec<f64> = (0..n_masks)
        .map(|m| coalition_value(model, x, bg, m as u64))
        .collect();
    // weight by coalition size: |S|! (d-|S|-1)! / d!
    let fact_d = factorial(d);
    let size_weight: Vec<f64> = (0..d)
        .map(|s| factorial(s) * factorial(d - s - 1) / fact_d)
        .collect();
    let mut phi = vec![0.0; d];
    for mask in 0..n_masks {
        let size = (mask as u64).count_ones() as usize;
        for j in 0..d {
            if mask >> j & 1 == 0 {
                phi[j] += size_weight[size] * (values[mask | 1 << j] - values[mask]);
            }
        }
    }
    phi
}

fn kernel_weight(d: usize, size: usize) -> f64 {
    let comb = factorial(d) / (factorial(size) * factorial(d - size));
    (d - 1) as f64 / (comb * size as f64 * (d - size) as f64)
}

fn kernel_shapley<M: Classifier + ?Sized>(
    model: &M,
    x: &[f64],
    bg: &[Vec<f64>],
    coalitions: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>> {
    let d = x.len();
    let v_empty = coalition_value(model, x, bg, 0);
    let v_full = model.predict_proba(x);
    let span = v_full - v_empty;

    // coalition masks with kernel weights
    let full_budget = d < 63 && coalitions as u64 >= (1u64 << d) - 2;
    let masks: Vec<(u64, f64)> = if full_budget {
        (1..(1u64 << d) - 1)
            .map(|m| (m, kernel_weight(d, m.count_ones() as usize)))
            .collect()
    } else {
        // sample coalition sizes from the normalized kernel distribution,
        // then a uniform subset of that size
        let size_probs: Vec<f64> = (1..d)
            .map(|s| {
                let comb = factorial(d) / (factorial(s) * factorial(d - s));
                comb * kernel_weight(d, s)
            })
            .collect();
        let total: f64 = size_probs.iter().sum();
        let mut masks = Vec::with_capacity(coalitions);
        let mut indices: Vec<usize> = (0..d).collect();
        for _ in 0..coalitions {
            let mut u = rng.gen_range(0.0..total);
            let mut size = 1;
            for (s, p) in size_probs.iter().enumerate() {
                if u < *p {
                    size = s + 1;
                    break;
                }
                u -= p;
                size = s + 1;
            }
            indices.shuffle(rng);
            let mut mask = 0u64;
            for &j in indices.iter().take(size) {
                mask |= 1 << j;
            }
            masks.push((mask, 1.0));
        }
        masks
    };

    // constrained WLS: eliminate the last feature via the efficiency
    // constraint, solve for the first d-1 coefficients
    let mut design = Vec::with_capacity(masks.len());
    let mut targets = Vec::with_capacity(masks.len());
    let mut weights = Vec::with_capacity(masks.len());
    for &(mask, w) in &masks {
        let v = coalition_value(model, x, bg, mask);
        let z_last = (mask >> (d - 1) & 1) as f64;
        let row: Vec<f64> = (0..d - 1)
            .map(|j| (mask >> j & 1) as f64 - z_last)
            .collect();
        design.push(row);
        targets.push(v - v_empty - z_last * span);
        weights.push(w);
    }
    let beta = linalg::weighted_ridge(&design, &targets, &weights, &vec![0.0; d - 1])?;
    let mut phi = beta;
    let phi_last = span - phi.iter().sum::<f64>();
    phi.push(phi_last);
    Ok(phi)
}

pub fn explain_shap<M: Classifier + ?Sized>(
    model: &M,
    x: &[f64],
    background: &Dataset,
    cfg: &ShapConfig,
    instance_id: usize,
) -> Result<Attribution> {
    if background.n_rows() == 0 {
        return Err(AuditError::EmptyDataset);
    }
    let d = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(substream(cfg.seed, instance_id));
    let bg = sample_background(background, cfg.background_size, &mut rng);

    let phi = match cfg.mode {
        ShapMode::Exact => {
            if d > EXACT_MAX_FEATURES {
                return Err(AuditError::TooManyFeaturesExact {
                    got: d,
                    max: EXACT_MAX_FEATURES,
                });
            }
            exact_shapley(model, x, &bg)
        }
        ShapMode::Kernel => {
            if cfg.coalitions < 2 * d {
                return Err(AuditError::TooFewCoalitions {
                    min: 2 * d,
                    d,
                    got: cfg.coalitions,
                });
            }
            kernel_shapley(model, x, &bg, cfg.coalitions, &mut rng)?
        }
    };
    Ok(Attribution::new(instance_id, Method::Shap, phi))
}

/// [`Explainer`] wrapper binding a background set and configuration.
pub struct ShapExplainer<'a> {
    pub background: &'a Dataset,
    pub cfg: ShapConfig,
}

impl Explainer for ShapExplainer<'_> {
    fn method_label(&self) -> &str {
        "shap"
    }

    fn explain(
        &self,
        model: &dyn Classifier,
        x: &[f64],
        instance_id: usize,
    ) -> Result<Attribution> {
        explain_shap(model, x, self.background, &self.cfg, instance_id)
    }
}
