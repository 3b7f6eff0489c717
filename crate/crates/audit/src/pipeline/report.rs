//! Report assembly and file emission. Plots are views over the CSVs, never
//! sources; every file is byte-stable under identical inputs.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::AuditConfig;
use super::svg;
use crate::error::Result;
use crate::explain::Attribution;
use crate::robustness::{OccurrenceTable, RankScoreTable, RobustnessVerdict};
use crate::scoring::ScoreKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyEntry {
    pub model: String,
    pub setting: String,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalScoreEntry {
    pub feature: String,
    pub value: f64,
    pub aggregated_over: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalScoreSet {
    pub model: String,
    pub setting: String,
    pub kind: ScoreKind,
    pub scores: Vec<GlobalScoreEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTableReport {
    pub table: RankScoreTable,
    pub verdict: RobustnessVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipEntry {
    /// Matrix-cell coordinate, e.g. "rank/voting/high_level/shap/necessity".
    pub cell: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub config: AuditConfig,
    pub out_of_range_test_cells: usize,
    pub accuracies: Vec<AccuracyEntry>,
    pub global_scores: Vec<GlobalScoreSet>,
    pub rank_tables: Vec<RankTableReport>,
    pub occurrence_tables: Vec<OccurrenceTable>,
    pub skipped: Vec<SkipEntry>,
}

fn table_stem(model: &str, setting: &str, explainer: &str) -> String {
    format!("{model}_{setting}_{explainer}")
}

fn write_if_changed(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content)?;
    Ok(())
}

/// Writes report.json, one CSV per table, and one SVG per rank table and
/// global score set. Returns the emitted file names in emission order.
pub fn emit_report(report: &RobustnessReport, dir: &Path) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut emit = |name: String, content: String| -> Result<()> {
        write_if_changed(&dir.join(&name), &content)?;
        files.push(name);
        Ok(())
    };

    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    emit("report.json".into(), json)?;

    let mut acc = String::from("model,setting,train_accuracy,test_accuracy\n");
    for e in &report.accuracies {
        writeln!(
            acc,
            "{},{},{},{}",
            e.model, e.setting, e.train_accuracy, e.test_accuracy
        )
        .unwrap();
    }
    emit("accuracy.csv".into(), acc)?;

    for set in &report.global_scores {
        let stem = format!(
            "global_{}_{}_{}",
            set.kind.label(),
            set.model,
            set.setting
        );
        let mut csv = String::from("feature,value,aggregated_over,skipped\n");
        for s in &set.scores {
            writeln!(csv, "{},{},{},{}", s.feature, s.value, s.aggregated_over, s.skipped)
                .unwrap();
        }
        emit(format!("{stem}.csv"), csv)?;
        let labels: Vec<&str> = set.scores.iter().map(|s| s.feature.as_str()).collect();
        let values: Vec<f64> = set.scores.iter().map(|s| s.value).collect();
        let title = format!(
            "global {} / {} / {}",
            set.kind.label(),
            set.model,
            set.setting
        );
        emit(format!("{stem}.svg"), svg::bar_chart(&title, &labels, &values))?;
    }

    for rt in &report.rank_tables {
        let t = &rt.table;
        let stem = format!(
            "rank_{}_{}",
            table_stem(&t.model, &t.setting, &t.explainer),
            t.score_kind.label()
        );
        let mut csv = String::from("rank,mean,instances,skipped\n");
        for e in &t.entries {
            writeln!(csv, "{},{},{},{}", e.rank, e.mean, e.instances, e.skipped).unwrap();
        }
        writeln!(
            csv,
            "# monotonicity violations: {}",
            if rt.verdict.violations.is_empty() {
                "none".to_string()
            } else {
                rt.verdict
                    .violations
                    .iter()
                    .map(|(a, b)| format!("({a},{b})"))
                    .collect::<Vec<_>>()
                    .join(" ")
            }
        )
        .unwrap();
        emit(format!("{stem}.csv"), csv)?;
        let labels: Vec<&str> = t.entries.iter().map(|e| e.rank.as_str()).collect();
        let values: Vec<f64> = t.entries.iter().map(|e| e.mean).collect();
        let title = format!(
            "{} mean by rank / {} / {} / {}",
            t.score_kind.label(),
            t.model,
            t.setting,
            t.explainer
        );
        emit(format!("{stem}.svg"), svg::bar_chart(&title, &labels, &values))?;
    }

    for ot in &report.occurrence_tables {
        let stem = format!(
            "occurrence_{}",
            table_stem(&ot.model, &ot.setting, &ot.explainer)
        );
        emit(format!("{stem}.csv"), occurrence_csv(ot))?;
    }

    Ok(files)
}

/// Appendix-style layout: one row per high-level feature (all features when
/// the dataset carries no group tags) plus a terminal "Rest (Averaged)" row.
pub fn occurrence_csv(t: &OccurrenceTable) -> String {
    let mut out = String::from("feature");
    for k in &t.k_list {
        write!(out, ",top{k}").unwrap();
    }
    out.push('\n');
    match &t.rest_averaged {
        Some(rest) => {
            // features folded into the rest average get no row of their own
            for (f, name) in t.features.iter().enumerate() {
                if t.rest_features.contains(&f) {
                    continue;
                }
                write!(out, "{name}").unwrap();
                for ki in 0..t.k_list.len() {
                    write!(out, ",{}", t.counts[f][ki]).unwrap();
                }
                out.push('\n');
            }
            out.push_str("Rest (Averaged)");
            for v in rest {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
        None => {
            for (f, name) in t.features.iter().enumerate() {
                write!(out, "{name}").unwrap();
                for ki in 0..t.k_list.len() {
                    write!(out, ",{}", t.counts[f][ki]).unwrap();
                }
                out.push('\n');
            }
        }
    }
    out
}

/// Attribution dump: CSV rows (instance_id, method, feature, score, rank).
pub fn attributions_csv(attrs: &[Attribution], names: &[String]) -> String {
    let mut out = String::from("instance_id,method,feature,score,rank\n");
    for a in attrs {
        for (rank, &feature) in a.ranking.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{}",
                a.instance_id,
                a.method.label(),
                names[feature],
                a.scores[feature],
                rank + 1
            )
            .unwrap();
        }
    }
    out
}
