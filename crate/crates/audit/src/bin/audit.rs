use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use audit::dataset::{feature_grid, GroupFilter};
use audit::explain::{Explainer, LimeExplainer, ShapExplainer};
use audit::model::train;
use audit::oracle::{generate_planted, PlantedSpec};
use audit::pipeline::{
    attributions_csv, emit_report, resolve_dataset, run_audit, AuditConfig, ModelChoice,
};
use audit::robustness::explain_all;
use audit::scoring::{necessity_global, necessity_local, sufficiency_global, sufficiency_local};
use audit::AuditError;

/// Audit the robustness of LIME/SHAP explanations via necessity and
/// sufficiency scoring.
#[derive(Parser)]
#[command(name = "audit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SettingArg {
    All,
    HighLevel,
}

impl From<SettingArg> for GroupFilter {
    fn from(s: SettingArg) -> GroupFilter {
        match s {
            SettingArg::All => GroupFilter::All,
            SettingArg::HighLevel => GroupFilter::HighLevel,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    LogisticRegression,
    GaussianNb,
    RandomForest,
    Voting,
}

impl From<ModelArg> for ModelChoice {
    fn from(m: ModelArg) -> ModelChoice {
        match m {
            ModelArg::LogisticRegression => ModelChoice::LogisticRegression,
            ModelArg::GaussianNb => ModelChoice::GaussianNb,
            ModelArg::RandomForest => ModelChoice::RandomForest,
            ModelArg::Voting => ModelChoice::Voting,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Lime,
    Shap,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full audit matrix and write the report files.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker count (overrides config and AUDIT_JOBS).
        #[arg(long)]
        jobs: Option<usize>,
        /// Split seed override.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Generate a planted synthetic dataset as CSV plus group sidecar.
    Planted {
        /// JSON planted spec file.
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        rows: usize,
        /// Output CSV path; the sidecar lands next to it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Explain test instances for one matrix cell and dump attributions.
    Explain {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, value_enum, default_value = "all")]
        setting: SettingArg,
        #[arg(long, value_enum)]
        method: MethodArg,
        /// Restrict to one test instance index.
        #[arg(long)]
        instance: Option<usize>,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Global (and optionally local) scores for one feature in one cell.
    Scores {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long, value_enum, default_value = "all")]
        setting: SettingArg,
        #[arg(long)]
        feature: String,
        /// Also print the local scores for this test instance index.
        #[arg(long)]
        instance: Option<usize>,
    },
}

#[derive(Deserialize)]
struct PlantedFile {
    #[serde(flatten)]
    spec: PlantedSpec,
    #[serde(default)]
    high_level: Option<Vec<String>>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> audit::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            out,
            jobs,
            seed,
        } => {
            let mut cfg = AuditConfig::load(&config)?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            if let Some(jobs) = jobs {
                cfg.jobs = Some(jobs);
            }
            if let Some(seed) = seed {
                cfg.split.seed = seed;
            }
            let report = run_audit(&cfg)?;
            let files = emit_report(&report, &cfg.output_dir)?;
            println!(
                "wrote {} files to {} ({} cells skipped)",
                files.len(),
                cfg.output_dir.display(),
                report.skipped.len()
            );
            for s in &report.skipped {
                eprintln!("skipped {}: {}", s.cell, s.reason);
            }
            Ok(if report.skipped.is_empty() {
                ExitCode::from(0)
            } else {
                ExitCode::from(2)
            })
        }
        Command::Planted { spec, rows, out } => {
            if !spec.exists() {
                return Err(AuditError::MissingFile(spec));
            }
            let file: PlantedFile = serde_json::from_str(&std::fs::read_to_string(&spec)?)?;
            let data = generate_planted(&file.spec, rows)?;
            let mut csv = data
                .specs
                .iter()
                .map(|s| s.name.clone())
                .collect::<Vec<_>>()
                .join(",");
            csv.push_str(",label\n");
            for (row, label) in data.rows.iter().zip(&data.labels) {
                let mut cells = Vec::with_capacity(row.len() + 1);
                for (spec, &v) in data.specs.iter().zip(row) {
                    match &spec.kind {
                        audit::dataset::FeatureKind::Categorical { codes } => {
                            cells.push(codes[v as usize].clone())
                        }
                        audit::dataset::FeatureKind::Continuous { .. } => {
                            cells.push(v.to_string())
                        }
                    }
                }
                cells.push(label.to_string());
                csv.push_str(&cells.join(","));
                csv.push('\n');
            }
            std::fs::write(&out, csv)?;
            let high_level = file.high_level.unwrap_or_else(|| {
                file.spec
                    .relevant
                    .iter()
                    .map(|&(j, _)| format!("f{j}"))
                    .collect()
            });
            let sidecar = out.with_extension("groups.json");
            std::fs::write(
                &sidecar,
                serde_json::to_string_pretty(&audit::dataset::GroupSidecar { high_level })? + "\n",
            )?;
            println!("wrote {} and {}", out.display(), sidecar.display());
            Ok(ExitCode::from(0))
        }
        Command::Explain {
            config,
            model,
            setting,
            method,
            instance,
            out,
        } => {
            let cfg = AuditConfig::load(&config)?;
            let (train_set, test_set) = prepare(&cfg, setting.into())?;
            let m = train(
                ModelChoice::from(model).to_kind(cfg.voting_weights),
                &train_set,
                cfg.split.seed,
            )?;
            let explainer: Box<dyn Explainer> = match method {
                MethodArg::Lime => Box::new(LimeExplainer {
                    background: &train_set,
                    cfg: cfg.lime.clone(),
                }),
                MethodArg::Shap => Box::new(ShapExplainer {
                    background: &train_set,
                    cfg: cfg.shap.clone(),
                }),
            };
            let attrs = match instance {
                Some(i) => {
                    if i >= test_set.n_rows() {
                        return Err(AuditError::InvalidConfig(format!(
                            "instance {i} out of range ({} test rows)",
                            test_set.n_rows()
                        )));
                    }
                    vec![explainer.explain(&m, &test_set.rows[i], i)?]
                }
                None => explain_all(&m, explainer.as_ref(), &test_set)?,
            };
            let csv = attributions_csv(&attrs, &test_set.feature_names());
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(ExitCode::from(0))
        }
        Command::Scores {
            config,
            model,
            setting,
            feature,
            instance,
        } => {
            let cfg = AuditConfig::load(&config)?;
            let (train_set, test_set) = prepare(&cfg, setting.into())?;
            let m = train(
                ModelChoice::from(model).to_kind(cfg.voting_weights),
                &train_set,
                cfg.split.seed,
            )?;
            let j = test_set
                .feature_index(&feature)
                .ok_or_else(|| AuditError::MissingColumn(feature.clone()))?;
            let nec = necessity_global(&m, &test_set, j, cfg.scoring.grid_n, cfg.scoring.n_instances)?;
            println!(
                "{feature},necessity,global,-,{},{}",
                nec.value, nec.aggregated_over
            );
            match sufficiency_global(&m, &test_set, j, cfg.scoring.r_references) {
                Ok(suf) => println!(
                    "{feature},sufficiency,global,-,{},{}",
                    suf.value, suf.aggregated_over
                ),
                Err(e) => println!("{feature},sufficiency,global,-,skipped: {e},0"),
            }
            if let Some(i) = instance {
                let grid = feature_grid(&test_set.specs[j], cfg.scoring.grid_n)?;
                let local = necessity_local(&m, &test_set.rows[i], j, &grid, &test_set, i)?;
                println!("{feature},necessity,local,{i},{},{}", local.value, local.support);
                match sufficiency_local(&m, &test_set.rows[i], j, &test_set, Some(i), i) {
                    Some(s) => {
                        println!("{feature},sufficiency,local,{i},{},{}", s.value, s.support)
                    }
                    None => println!("{feature},sufficiency,local,{i},skipped,0"),
                }
            }
            Ok(ExitCode::from(0))
        }
    }
}

fn prepare(
    cfg: &AuditConfig,
    setting: GroupFilter,
) -> audit::Result<(audit::dataset::Dataset, audit::dataset::Dataset)> {
    let data = resolve_dataset(cfg)?;
    let split = data.split(cfg.split.ratio, cfg.split.seed)?;
    Ok((
        split.train.select_group(setting)?,
        split.test.select_group(setting)?,
    ))
}
