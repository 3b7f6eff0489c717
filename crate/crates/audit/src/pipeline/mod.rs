//! Orchestration of the full audit matrix:
//! {models} x {feature settings} x {explainers} x {score kinds}.
//!
//! Cells run in parallel; each cell is internally sequential and seeded from
//! the config alone, so reports are byte-identical at any worker count.
//! A failing cell is recorded with its coordinate and the rest still run.

pub mod config;
pub mod report;
pub mod svg;

pub use config::{AuditConfig, DataSource, ModelChoice, ScoringConfig, SplitConfig};
pub use report::{
    attributions_csv, emit_report, occurrence_csv, AccuracyEntry, GlobalScoreEntry,
    GlobalScoreSet, RankTableReport, RobustnessReport, SkipEntry,
};

use crate::dataset::{load_csv, load_group_sidecar, Dataset, GroupFilter};
use crate::error::{AuditError, Result};
use crate::explain::{Explainer, LimeExplainer, Method, ShapExplainer};
use crate::model::{evaluate_accuracy, train, TrainedModel};
use crate::oracle::generate_planted;
use crate::robustness::{
    explain_all, monotonicity_check, rank_wise_scores_from, topk_occurrence_from,
};
use crate::scoring::{necessity_global, sufficiency_global, ScoreKind};

fn setting_label(filter: GroupFilter) -> &'static str {
    match filter {
        GroupFilter::All => "all",
        GroupFilter::HighLevel => "high_level",
    }
}

/// Materialize the configured data source, with group tags applied.
pub fn resolve_dataset(cfg: &AuditConfig) -> Result<Dataset> {
    match &cfg.data {
        DataSource::Csv {
            path,
            label_column,
            categorical_columns,
            groups,
        } => {
            let cats = categorical_columns.iter().cloned().collect();
            let mut d = load_csv(path, label_column, &cats)?;
            if let Some(sidecar) = groups {
                let g = load_group_sidecar(sidecar)?;
                d.apply_groups(&g.high_level)?;
            }
            Ok(d)
        }
        DataSource::Planted {
            spec,
            rows,
            high_level,
        } => {
            let mut d = generate_planted(spec, *rows)?;
            let names = match high_level {
                Some(names) => names.clone(),
                // default: tag the planted relevant features
                None => spec.relevant.iter().map(|&(j, _)| format!("f{j}")).collect(),
            };
            d.apply_groups(&names)?;
            Ok(d)
        }
    }
}

struct CellOutput {
    accuracy: Option<AccuracyEntry>,
    globals: Vec<GlobalScoreSet>,
    rank_tables: Vec<RankTableReport>,
    occurrences: Vec<crate::robustness::OccurrenceTable>,
    skips: Vec<SkipEntry>,
}

fn run_model_cell(
    cfg: &AuditConfig,
    train_full: &Dataset,
    test_full: &Dataset,
    setting: GroupFilter,
    choice: ModelChoice,
) -> CellOutput {
    let mut out = CellOutput {
        accuracy: None,
        globals: Vec::new(),
        rank_tables: Vec::new(),
        occurrences: Vec::new(),
        skips: Vec::new(),
    };
    let kind = choice.to_kind(cfg.voting_weights);
    let model_label = kind.label();
    let set_label = setting_label(setting);
    let coord = |rest: &str| format!("{rest}/{model_label}/{set_label}");
    let skip = |out: &mut CellOutput, cell: String, err: &AuditError| {
        out.skips.push(SkipEntry {
            cell,
            reason: err.to_string(),
        });
    };

    let (train_set, test_set) = match (
        train_full.select_group(setting),
        test_full.select_group(setting),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            skip(&mut out, coord("cell"), &e);
            return out;
        }
    };

    let model: TrainedModel = match train(kind.clone(), &train_set, cfg.split.seed) {
        Ok(m) => m,
        Err(e) => {
            skip(&mut out, coord("train"), &e);
            return out;
        }
    };

    match (
        evaluate_accuracy(&model, &train_set),
        evaluate_accuracy(&model, &test_set),
    ) {
        (Ok(train_accuracy), Ok(test_accuracy)) => {
            out.accuracy = Some(AccuracyEntry {
                model: model_label.to_string(),
                setting: set_label.to_string(),
                train_accuracy,
                test_accuracy,
            });
        }
        (Err(e), _) | (_, Err(e)) => skip(&mut out, coord("accuracy"), &e),
    }

    // global scores per score kind over the test context
    for &score_kind in &cfg.score_kinds {
        let mut scores = Vec::new();
        let mut set_err: Option<AuditError> = None;
        for spec in &test_set.specs {
            let global = match score_kind {
                ScoreKind::Necessity => necessity_global(
                    &model,
                    &test_set,
                    spec.index,
                    cfg.scoring.grid_n,
                    cfg.scoring.n_instances,
                ),
                ScoreKind::Sufficiency => sufficiency_global(
                    &model,
                    &test_set,
                    spec.index,
                    cfg.scoring.r_references,
                ),
            };
            match global {
                Ok(g) => scores.push(GlobalScoreEntry {
                    feature: spec.name.clone(),
                    value: g.value,
                    aggregated_over: g.aggregated_over,
                    skipped: g.skipped,
                }),
                Err(e @ AuditError::SingleClassContext) => {
                    set_err = Some(e);
                    break;
                }
                Err(e) => skip(
                    &mut out,
                    format!("{}/{}", coord("global"), spec.name),
                    &e,
                ),
            }
        }
        if let Some(e) = set_err {
            skip(
                &mut out,
                format!("global/{}/{set_label}/{}", model_label, score_kind.label()),
                &e,
            );
        } else {
            out.globals.push(GlobalScoreSet {
                model: model_label.to_string(),
                setting: set_label.to_string(),
                kind: score_kind,
                scores,
            });
        }
    }

    // explainer-dependent tables
    for &method in &cfg.explainers {
        let explainer: Box<dyn Explainer> = match method {
            Method::Lime => Box::new(LimeExplainer {
                background: &train_set,
                cfg: cfg.lime.clone(),
            }),
            Method::Shap => Box::new(ShapExplainer {
                background: &train_set,
                cfg: cfg.shap.clone(),
            }),
        };
        let attrs = match explain_all(&model, explainer.as_ref(), &test_set) {
            Ok(a) => a,
            Err(e) => {
                skip(
                    &mut out,
                    format!("explain/{model_label}/{set_label}/{}", method.label()),
                    &e,
                );
                continue;
            }
        };

        match topk_occurrence_from(
            model_label,
            method.label(),
            set_label,
            &attrs,
            &test_set,
            &cfg.k_list,
        ) {
            Ok(t) => out.occurrences.push(t),
            Err(e) => skip(
                &mut out,
                format!("occurrence/{model_label}/{set_label}/{}", method.label()),
                &e,
            ),
        }

        for &score_kind in &cfg.score_kinds {
            match rank_wise_scores_from(
                &model,
                model_label,
                method.label(),
                set_label,
                &attrs,
                &test_set,
                score_kind,
                cfg.scoring.grid_n,
            ) {
                Ok(table) => {
                    let verdict = monotonicity_check(&table, cfg.monotonicity_tol);
                    out.rank_tables.push(RankTableReport { table, verdict });
                }
                Err(e) => skip(
                    &mut out,
                    format!(
                        "rank/{model_label}/{set_label}/{}/{}",
                        method.label(),
                        score_kind.label()
                    ),
                    &e,
                ),
            }
        }
    }

    out
}

/// Worker count: explicit config, then the AUDIT_JOBS env var, then all
/// cores (rayon default, encoded as 0).
pub fn resolve_jobs(cfg: &AuditConfig) -> usize {
    cfg.jobs
        .or_else(|| {
            std::env::var("AUDIT_JOBS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0)
}

pub fn run_audit(cfg: &AuditConfig) -> Result<RobustnessReport> {
    cfg.validate()?;
    let dataset = resolve_dataset(cfg)?;
    let split = dataset.split(cfg.split.ratio, cfg.split.seed)?;

    let cells: Vec<(GroupFilter, ModelChoice)> = cfg
        .settings
        .iter()
        .flat_map(|&s| cfg.models.iter().map(move |&m| (s, m)))
        .collect();

    let jobs = resolve_jobs(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| AuditError::InvalidConfig(format!("thread pool: {e}")))?;
    let outputs: Vec<CellOutput> = pool.install(|| {
        use rayon::prelude::*;
        cells
            .par_iter()
            .map(|&(setting, choice)| {
                run_model_cell(cfg, &split.train, &split.test, setting, choice)
            })
            .collect()
    });

    let mut report = RobustnessReport {
        config: cfg.clone(),
        out_of_range_test_cells: split.out_of_range,
        accuracies: Vec::new(),
        global_scores: Vec::new(),
        rank_tables: Vec::new(),
        occurrence_tables: Vec::new(),
        skipped: Vec::new(),
    };
    for cell in outputs {
        if let Some(acc) = cell.accuracy {
            report.accuracies.push(acc);
        }
        report.global_scores.extend(cell.globals);
        report.rank_tables.extend(cell.rank_tables);
        report.occurrence_tables.extend(cell.occurrences);
        report.skipped.extend(cell.skips);
    }
    Ok(report)
}
