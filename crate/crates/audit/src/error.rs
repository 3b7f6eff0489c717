use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by dataset handling, model training, explanation, and
/// scoring. Pipeline cells attach their matrix coordinate before recording.
#[derive(Debug, Error)]
pub enum AuditError {
    #[error("file not found: {0}")]
    MissingFile(PathBuf),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("label column `{column}` has {distinct} distinct values, expected exactly 2")]
    NonBinaryLabel { column: String, distinct: usize },

    #[error("missing column `{0}` in header")]
    MissingColumn(String),

    #[error("non-numeric value `{value}` in continuous column `{column}`, row {row}")]
    NonNumericCell {
        column: String,
        row: usize,
        value: String,
    },

    #[error("row {row} has {got} fields, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },

    #[error("missing value in column `{column}`, row {row}")]
    MissingValue { column: String, row: usize },

    #[error("dataset has {0} rows, need at least {1}")]
    TooFewRows(usize, usize),

    #[error("split ratio {0} outside (0, 1)")]
    BadSplitRatio(f64),

    #[error("no features carry the requested group tag")]
    EmptyGroupSelection,

    #[error("grid size {0} below minimum of 2 for a continuous feature")]
    GridTooSmall(usize),

    #[error("training data contains a single class")]
    SingleClassTraining,

    #[error("instance has {got} features, model expects {expected}")]
    DimensionMismatch { got: usize, expected: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("perturbation grid empty after excluding the original value")]
    EmptyPerturbationSet,

    #[error("lime requires at least {min} samples for {d} features, got {got}")]
    TooFewSamples { min: usize, d: usize, got: usize },

    #[error("weighted least squares system is singular even after ridge regularization")]
    SingularSystem,

    #[error("exact shapley mode limited to {max} features, got {got}")]
    TooManyFeaturesExact { got: usize, max: usize },

    #[error("kernel shap requires at least {min} coalitions for {d} features, got {got}")]
    TooFewCoalitions { min: usize, d: usize, got: usize },

    #[error("rank {k} out of range for {d} features")]
    RankOutOfRange { k: usize, d: usize },

    #[error("rank-wise scoring requires at least 4 features, got {0}")]
    TooFewFeaturesForRanks(usize),

    #[error("every local score was undefined")]
    AllLocalsUndefined,

    #[error("context has a single predicted class; sufficiency is undefined")]
    SingleClassContext,

    #[error("invalid planted spec: {0}")]
    InvalidPlantedSpec(String),

    #[error("enumeration budget exceeded: {0} predictions required")]
    EnumerationBudget(usize),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("model persistence format mismatch: {0}")]
    PersistenceFormat(String),
}

pub type Result<T> = std::result::Result<T, AuditError>;
