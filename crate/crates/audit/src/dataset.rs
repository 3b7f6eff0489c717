//! Tabular dataset loading, typing, splitting, and perturbation grids.
//!
//! Feature values are stored as `f64` throughout: continuous cells hold the
//! raw value, categorical cells hold the 0-based index into the spec's
//! ordered code list. Datasets are immutable after construction.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{AuditError, Result};

/// Domain of one feature column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FeatureKind {
    /// Observed (min, max) on the data the spec was fitted on.
    Continuous { min: f64, max: f64 },
    /// Ordered list of distinct category codes; cell values index into it.
    Categorical { codes: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    HighLevel,
    Rest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub index: usize,
    pub kind: FeatureKind,
    pub group: Group,
}

impl FeatureSpec {
    pub fn is_categorical(&self) -> bool {
        matches!(self.kind, FeatureKind::Categorical { .. })
    }

    /// A continuous feature whose observed min equals its max, or a
    /// categorical feature with a single code.
    pub fn is_degenerate(&self) -> bool {
        match &self.kind {
            FeatureKind::Continuous { min, max } => min == max,
            FeatureKind::Categorical { codes } => codes.len() <= 1,
        }
    }
}

/// Which feature subset an experiment runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupFilter {
    All,
    HighLevel,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub specs: Vec<FeatureSpec>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    /// Raw label values in ascending lexicographic order; index = mapped label.
    pub label_names: [String; 2],
}

#[derive(Debug, Clone)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub seed: u64,
    /// Continuous test cells falling outside the train-fitted (min, max).
    /// Kept, not rejected; recorded for the report.
    pub out_of_range: usize,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.specs.len()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.specs.iter().map(|s| s.name.clone()).collect()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.specs.iter().position(|s| s.name == name)
    }

    /// Tag the named features as high-level, all others as rest.
    pub fn apply_groups(&mut self, high_level: &[String]) -> Result<()> {
        for name in high_level {
            if self.feature_index(name).is_none() {
                return Err(AuditError::MissingColumn(name.clone()));
            }
        }
        for spec in &mut self.specs {
            spec.group = if high_level.contains(&spec.name) {
                Group::HighLevel
            } else {
                Group::Rest
            };
        }
        Ok(())
    }

    /// Deterministic shuffle under `seed`; the first `floor(ratio * N)` rows
    /// become the train half. Specs of both halves are re-fitted from the
    /// train half only.
    pub fn split(&self, ratio: f64, seed: u64) -> Result<SplitPair> {
        if self.n_rows() < 2 {
            return Err(AuditError::TooFewRows(self.n_rows(), 2));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(AuditError::BadSplitRatio(ratio));
        }
        let mut order: Vec<usize> = (0..self.n_rows()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
        let n_train = ((ratio * self.n_rows() as f64).floor() as usize).clamp(1, self.n_rows() - 1);

        let take = |idx: &[usize]| -> (Vec<Vec<f64>>, Vec<u8>) {
            (
                idx.iter().map(|&i| self.rows[i].clone()).collect(),
                idx.iter().map(|&i| self.labels[i]).collect(),
            )
        };
        let (train_rows, train_labels) = take(&order[..n_train]);
        let (test_rows, test_labels) = take(&order[n_train..]);

        let train_specs = refit_continuous(&self.specs, &train_rows);
        let mut out_of_range = 0;
        for row in &test_rows {
            for spec in &train_specs {
                if let FeatureKind::Continuous { min, max } = spec.kind {
                    let v = row[spec.index];
                    if v < min || v > max {
                        out_of_range += 1;
                    }
                }
            }
        }

        Ok(SplitPair {
            train: Dataset {
                specs: train_specs.clone(),
                rows: train_rows,
                labels: train_labels,
                label_names: self.label_names.clone(),
            },
            test: Dataset {
                specs: train_specs,
                rows: test_rows,
                labels: test_labels,
                label_names: self.label_names.clone(),
            },
            seed,
            out_of_range,
        })
    }

    /// Column-subset by group tag, preserving row order and labels.
    pub fn select_group(&self, filter: GroupFilter) -> Result<Dataset> {
        let keep: Vec<usize> = match filter {
            GroupFilter::All => (0..self.n_features()).collect(),
            GroupFilter::HighLevel => self
                .specs
                .iter()
                .filter(|s| s.group == Group::HighLevel)
                .map(|s| s.index)
                .collect(),
        };
        if keep.is_empty() {
            return Err(AuditError::EmptyGroupSelection);
        }
        let specs = keep
            .iter()
            .enumerate()
            .map(|(new_idx, &old)| FeatureSpec {
                index: new_idx,
                ..self.specs[old].clone()
            })
            .collect();
        let rows = self
            .rows
            .iter()
            .map(|r| keep.iter().map(|&j| r[j]).collect())
            .collect();
        Ok(Dataset {
            specs,
            rows,
            labels: self.labels.clone(),
            label_names: self.label_names.clone(),
        })
    }
}

fn refit_continuous(specs: &[FeatureSpec], rows: &[Vec<f64>]) -> Vec<FeatureSpec> {
    specs
        .iter()
        .map(|spec| match spec.kind {
            FeatureKind::Continuous { .. } => {
                let mut min = f64::INFINITY;
                let mut max = f64::NEG_INFINITY;
                for row in rows {
                    let v = row[spec.index];
                    min = min.min(v);
                    max = max.max(v);
                }
                FeatureSpec {
                    kind: FeatureKind::Continuous { min, max },
                    ..spec.clone()
                }
            }
            // Categorical domains stay global so test codes remain resolvable.
            FeatureKind::Categorical { .. } => spec.clone(),
        })
        .collect()
}

/// Perturbation values for one feature: `n` equally spaced points over the
/// observed (min, max) for continuous, the full code domain for categorical.
pub fn feature_grid(spec: &FeatureSpec, n: usize) -> Result<Vec<f64>> {
    match &spec.kind {
        FeatureKind::Continuous { min, max } => {
            if min == max {
                return Ok(vec![*min]);
            }
            if n < 2 {
                return Err(AuditError::GridTooSmall(n));
            }
            let step = (max - min) / (n - 1) as f64;
            let mut grid: Vec<f64> = (0..n).map(|i| min + step * i as f64).collect();
            // force exact endpoints
            grid[0] = *min;
            grid[n - 1] = *max;
            Ok(grid)
        }
        FeatureKind::Categorical { codes } => Ok((0..codes.len()).map(|c| c as f64).collect()),
    }
}

/// Load a CSV with a header row. The label column must hold exactly two
/// distinct values; they map to {0, 1} in ascending lexicographic order.
pub fn load_csv(
    path: &Path,
    label_column: &str,
    categorical_columns: &BTreeSet<String>,
) -> Result<Dataset> {
    if !path.exists() {
        return Err(AuditError::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| AuditError::MissingColumn(label_column.to_string()))?;

    let mut raw_rows: Vec<Vec<String>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(AuditError::RaggedRow {
                row: i,
                got: record.len(),
                expected: header.len(),
            });
        }
        raw_rows.push(record.iter().map(str::to_string).collect());
    }
    if raw_rows.is_empty() {
        return Err(AuditError::TooFewRows(0, 1));
    }

    let label_values: BTreeSet<&String> = raw_rows.iter().map(|r| &r[label_idx]).collect();
    if label_values.len() != 2 {
        return Err(AuditError::NonBinaryLabel {
            column: label_column.to_string(),
            distinct: label_values.len(),
        });
    }
    let label_names: Vec<String> = label_values.into_iter().cloned().collect();
    let labels: Vec<u8> = raw_rows
        .iter()
        .map(|r| u8::from(r[label_idx] == label_names[1]))
        .collect();

    let feature_cols: Vec<usize> = (0..header.len()).filter(|&c| c != label_idx).collect();
    let mut specs = Vec::with_capacity(feature_cols.len());
    let mut rows = vec![Vec::with_capacity(feature_cols.len()); raw_rows.len()];

    for (out_idx, &col) in feature_cols.iter().enumerate() {
        let name = header[col].clone();
        if categorical_columns.contains(&name) {
            let codes: Vec<String> = raw_rows
                .iter()
                .map(|r| r[col].clone())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            for (i, r) in raw_rows.iter().enumerate() {
                if r[col].is_empty() {
                    return Err(AuditError::MissingValue {
                        column: name.clone(),
                        row: i,
                    });
                }
                let code = codes.iter().position(|c| *c == r[col]).unwrap();
                rows[i].push(code as f64);
            }
            specs.push(FeatureSpec {
                name,
                index: out_idx,
                kind: FeatureKind::Categorical { codes },
                group: Group::Rest,
            });
        } else {
            let mut min = f64::INFINITY;
            let mut max = f64::NEG_INFINITY;
            for (i, r) in raw_rows.iter().enumerate() {
                let cell = &r[col];
                if cell.is_empty() {
                    return Err(AuditError::MissingValue {
                        column: name.clone(),
                        row: i,
                    });
                }
                let v: f64 = cell.parse().map_err(|_| AuditError::NonNumericCell {
                    column: name.clone(),
                    row: i,
                    value: cell.clone(),
                })?;
                if !v.is_finite() {
                    return Err(AuditError::NonNumericCell {
                        column: name.clone(),
                        row: i,
                        value: cell.clone(),
                    });
                }
                min = min.min(v);
                max = max.max(v);
                rows[i].push(v);
            }
            specs.push(FeatureSpec {
                name,
                index: out_idx,
                kind: FeatureKind::Continuous { min, max },
                group: Group::Rest,
            });
        }
    }

    Ok(Dataset {
        specs,
        rows,
        labels,
        label_names: [label_names[0].clone(), label_names[1].clone()],
    })
}

/// Sidecar format carrying the high-level feature names.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupSidecar {
    pub high_level: Vec<String>,
}

pub fn load_group_sidecar(path: &Path) -> Result<GroupSidecar> {
    if !path.exists() {
        return Err(AuditError::MissingFile(path.to_path_buf()));
    }
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
