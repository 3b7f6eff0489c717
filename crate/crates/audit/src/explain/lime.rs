//! Local linear surrogate: perturb around the instance, weight by a
//! distance kernel, fit ridge-regularized weighted least squares on the
//! model's probability output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{substream, Attribution, Explainer, Method};
use crate::dataset::{Dataset, FeatureKind};
use crate::error::{AuditError, Result};
use crate::linalg;
use crate::model::Classifier;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimeConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_kernel_width")]
    pub kernel_width: f64,
    #[serde(default = "default_ridge")]
    pub ridge: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_samples() -> usize {
    1000
}

fn default_kernel_width() -> f64 {
    0.75
}

fn default_ridge() -> f64 {
    1e-3
}

impl Default for LimeConfig {
    fn default() -> Self {
        LimeConfig {
            samples: 1000,
            kernel_width: 0.75,
            ridge: 1e-3,
            seed: 0,
        }
    }
}

struct FeatureStats {
    mean: f64,
    std: f64,
    domain: FeatureKind,
}

fn background_stats(background: &Dataset) -> Vec<FeatureStats> {
    let n = background.n_rows() as f64;
    background
        .specs
        .iter()
        .map(|spec| {
            let col: Vec<f64> = background.rows.iter().map(|r| r[spec.index]).collect();
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            FeatureStats {
                mean,
                std: if var > 0.0 { var.sqrt() } else { 1.0 },
                domain: spec.kind.clone(),
            }
        })
        .collect()
}

/// Explain one instance. Scores are the surrogate's coefficients on
/// standardized features; a singular system after ridge is reported, never
/// silently zeroed.
pub fn explain_lime<M: Classifier + ?Sized>(
    model: &M,
    x: &[f64],
    background: &Dataset,
    cfg: &LimeConfig,
    instance_id: usize,
) -> Result<Attribution> {
    if background.n_rows() == 0 {
        return Err(AuditError::EmptyDataset);
    }
    let d = x.len();
    if cfg.samples < d + 2 {
        return Err(AuditError::TooFewSamples {
            min: d + 2,
            d,
            got: cfg.samples,
        });
    }
    let stats = background_stats(background);
    let sigma = cfg.kernel_width * (d as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(substream(cfg.seed, instance_id));

    let mut design = Vec::with_capacity(cfg.samples);
    let mut targets = Vec::with_capacity(cfg.samples);
    let mut weights = Vec::with_capacity(cfg.samples);
    let mut perturbed = x.to_vec();
    for _ in 0..cfg.samples {
        let mut dist_sq = 0.0;
        let mut row = Vec::with_capacity(d + 1);
        for j in 0..d {
            let s = &stats[j];
            match &s.domain {
                FeatureKind::Continuous { min, max } => {
                    let noise = Normal::new(0.0, s.std).unwrap().sample(&mut rng);
                    let v = (x[j] + noise).clamp(*min, *max);
                    perturbed[j] = v;
                    dist_sq += ((v - x[j]) / s.std).powi(2);
                    row.push((v - s.mean) / s.std);
                }
                FeatureKind::Categorical { codes } => {
                    let v = if rng.gen_bool(0.5) {
                        rng.gen_range(0..codes.len()) as f64
                    } else {
                        x[j]
                    };
                    perturbed[j] = v;
                    let same = v == x[j];
                    if !same {
                        dist_sq += 1.0;
                    }
                    row.push(if same { 1.0 } else { 0.0 });
                }
            }
        }
        row.push(1.0); // intercept
        design.push(row);
        targets.push(model.predict_proba(&perturbed));
        weights.push((-dist_sq / (sigma * sigma)).exp());
    }

    let mut ridge = vec![cfg.ridge; d + 1];
    ridge[d] = 0.0; // intercept unpenalized
    let mut beta = linalg::weighted_ridge(&design, &targets, &weights, &ridge)?;
    beta.truncate(d);
    Ok(Attribution::new(instance_id, Method::Lime, beta))
}

/// [`Explainer`] wrapper binding a background set and configuration.
pub struct LimeExplainer<'a> {
    pub background: &'a Dataset,
    pub cfg: LimeConfig,
}

impl Explainer for LimeExplainer<'_> {
    fn method_label(&self) -> &str {
        "lime"
    }

    fn explain(
        &self,
        model: &dyn Classifier,
        x: &[f64],
        instance_id: usize,
    ) -> Result<Attribution> {
        explain_lime(model, x, self.background, &self.cfg, instance_id)
    }
}
