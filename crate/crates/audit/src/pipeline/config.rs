//! Audit configuration. A single JSON file; every default is echoed back
//! into the report so a report is self-describing.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dataset::GroupFilter;
use crate::error::{AuditError, Result};
use crate::explain::{LimeConfig, Method, ShapConfig};
use crate::model::ModelKind;
use crate::oracle::PlantedSpec;
use crate::scoring::ScoreKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Csv {
        path: PathBuf,
        label_column: String,
        #[serde(default)]
        categorical_columns: Vec<String>,
        #[serde(default)]
        groups: Option<PathBuf>,
    },
    Planted {
        spec: PlantedSpec,
        rows: usize,
        /// High-level feature names; defaults to the planted relevant set.
        #[serde(default)]
        high_level: Option<Vec<String>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    LogisticRegression,
    GaussianNb,
    RandomForest,
    Voting,
}

impl ModelChoice {
    pub fn to_kind(self, voting_weights: [f64; 3]) -> ModelKind {
        match self {
            ModelChoice::LogisticRegression => ModelKind::LogisticRegression,
            ModelChoice::GaussianNb => ModelKind::GaussianNb,
            ModelChoice::RandomForest => ModelKind::RandomForest,
            ModelChoice::Voting => ModelKind::Voting {
                weights: voting_weights,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    #[serde(default = "default_ratio")]
    pub ratio: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            ratio: default_ratio(),
            seed: default_seed(),
        }
    }
}

fn default_ratio() -> f64 {
    0.7
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoringConfig {
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    /// Instances sampled for global necessity; all test instances when null.
    #[serde(default)]
    pub n_instances: Option<usize>,
    /// References sampled for global sufficiency; all test instances when null.
    #[serde(default)]
    pub r_references: Option<usize>,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            grid_n: default_grid_n(),
            n_instances: None,
            r_references: None,
        }
    }
}

fn default_grid_n() -> usize {
    20
}

fn default_models() -> Vec<ModelChoice> {
    vec![
        ModelChoice::LogisticRegression,
        ModelChoice::GaussianNb,
        ModelChoice::RandomForest,
        ModelChoice::Voting,
    ]
}

fn default_voting_weights() -> [f64; 3] {
    [1.0, 5.0, 1.0]
}

fn default_settings() -> Vec<GroupFilter> {
    vec![GroupFilter::All]
}

fn default_explainers() -> Vec<Method> {
    vec![Method::Lime, Method::Shap]
}

fn default_score_kinds() -> Vec<ScoreKind> {
    vec![ScoreKind::Necessity, ScoreKind::Sufficiency]
}

fn default_k_list() -> Vec<usize> {
    vec![1, 2, 3, 5]
}

fn default_tol() -> f64 {
    1e-9
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("audit-out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub data: DataSource,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default = "default_models")]
    pub models: Vec<ModelChoice>,
    #[serde(default = "default_voting_weights")]
    pub voting_weights: [f64; 3],
    #[serde(default = "default_settings")]
    pub settings: Vec<GroupFilter>,
    #[serde(default = "default_explainers")]
    pub explainers: Vec<Method>,
    #[serde(default = "default_score_kinds")]
    pub score_kinds: Vec<ScoreKind>,
    #[serde(default)]
    pub scoring: ScoringConfig,
    #[serde(default)]
    pub lime: LimeConfig,
    #[serde(default)]
    pub shap: ShapConfig,
    #[serde(default = "default_k_list")]
    pub k_list: Vec<usize>,
    #[serde(default = "default_tol")]
    pub monotonicity_tol: f64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Worker count; falls back to the AUDIT_JOBS env var, then all cores.
    #[serde(default)]
    pub jobs: Option<usize>,
}

impl AuditConfig {
    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(AuditError::InvalidConfig("no models requested".into()));
        }
        if self.explainers.is_empty() {
            return Err(AuditError::InvalidConfig("no explainers requested".into()));
        }
        if self.score_kinds.is_empty() {
            return Err(AuditError::InvalidConfig("no score kinds requested".into()));
        }
        if self.settings.is_empty() {
            return Err(AuditError::InvalidConfig("no feature settings requested".into()));
        }
        if !(self.split.ratio > 0.0 && self.split.ratio < 1.0) {
            return Err(AuditError::BadSplitRatio(self.split.ratio));
        }
        if self.voting_weights.iter().any(|&w| w < 0.0)
            || self.voting_weights.iter().all(|&w| w == 0.0)
        {
            return Err(AuditError::InvalidConfig(
                "voting weights must be non-negative and not all zero".into(),
            ));
        }
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return Err(AuditError::InvalidConfig("k_list must be positive".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<AuditConfig> {
        if !path.exists() {
            return Err(AuditError::MissingFile(path.to_path_buf()));
        }
        let cfg: AuditConfig = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }
}
