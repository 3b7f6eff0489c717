//! Acceptance suite: ten numbered criteria, one test and one printed
//! verdict line each. Oracle comparisons are exact unless a tolerance is
//! stated in the criterion itself.

use std::collections::BTreeSet;

use audit::dataset::{feature_grid, FeatureKind, FeatureSpec, Group, GroupFilter};
use audit::explain::{
    explain_lime, explain_shap, rank_by_magnitude, Attribution, LimeConfig, Method, ShapConfig,
    ShapMode,
};
use audit::model::{train, Classifier, ModelKind, TrainedModel};
use audit::oracle::{
    brute_force_necessity, brute_force_sufficiency, exact_shapley_reference, generate_planted,
    LabelRule, PlantedSpec,
};
use audit::pipeline::{run_audit, AuditConfig};
use audit::robustness::{monotonicity_check, rank_wise_scores_from};
use audit::scoring::{necessity_global, necessity_local, sufficiency_local};
use audit::testutil::{LinearProbaModel, ThresholdModel};

fn pass(n: u32, what: &str) {
    println!("criterion {n:02} ({what}): PASS");
}

/// Small discrete planted datasets (d <= 4, domain <= 8) with a trained
/// model each, cycling over model families.
fn discrete_fixtures() -> Vec<(audit::dataset::Dataset, TrainedModel)> {
    let kinds = [
        ModelKind::LogisticRegression,
        ModelKind::GaussianNb,
        ModelKind::RandomForest,
    ];
    let mut out = Vec::new();
    for (i, seed) in (0..6u64).enumerate() {
        let d = 2 + i % 3;
        let levels = [2, 4, 6, 8][i % 4];
        let relevant = if d == 2 {
            vec![(0, 2.0)]
        } else {
            vec![(0, 2.0), (1, 1.0)]
        };
        let spec = PlantedSpec {
            d,
            relevant,
            rule: LabelRule::LinearThreshold,
            noise_rate: 0.1,
            seed: 100 + seed,
            levels: Some(levels),
        };
        let data = generate_planted(&spec, 80).unwrap();
        let model = train(kinds[i % kinds.len()].clone(), &data, seed).unwrap();
        out.push((data, model));
    }
    out
}

#[test]
fn criterion_01_necessity_matches_brute_force_oracle() {
    let mut triples = 0usize;
    for (data, model) in discrete_fixtures() {
        for i in 0..data.n_rows().min(20) {
            for spec in &data.specs {
                let fast = feature_grid(spec, 20)
                    .and_then(|grid| {
                        necessity_local(&model, &data.rows[i], spec.index, &grid, &data, i)
                    })
                    .map(|s| s.value);
                let brute = brute_force_necessity(&model, &data.rows[i], spec, 20);
                match (fast, brute) {
                    (Ok(a), Ok(b)) => assert_eq!(a, b, "triple {triples} diverged"),
                    (Err(_), Err(_)) => {}
                    (a, b) => panic!("only one side errored: {a:?} vs {b:?}"),
                }
                triples += 1;
            }
        }
    }
    assert!(triples >= 200, "only {triples} triples checked");
    pass(1, "necessity equals brute force on >=200 triples, tolerance 0");
}

#[test]
fn criterion_02_sufficiency_matches_brute_force_oracle() {
    let mut triples = 0usize;
    let mut empty_k = 0usize;
    for (data, model) in discrete_fixtures() {
        for i in 0..data.n_rows().min(20) {
            for j in 0..data.n_features() {
                let fast = sufficiency_local(&model, &data.rows[i], j, &data, None, i)
                    .map(|s| s.value);
                let brute = brute_force_sufficiency(&model, &data.rows[i], j, &data.rows);
                match (fast, brute) {
                    (Some(a), Some(b)) => assert_eq!(a, b, "triple {triples} diverged"),
                    (None, None) => empty_k += 1,
                    (a, b) => panic!("empty-K flagged inconsistently: {a:?} vs {b:?}"),
                }
                triples += 1;
            }
        }
    }
    assert!(triples >= 200, "only {triples} triples checked");
    // undefined cases, when present, were flagged identically by both sides
    let _ = empty_k;
    pass(2, "sufficiency equals brute force, empty-K flagged identically");
}

#[test]
fn criterion_03_threshold_ground_truth() {
    let model = ThresholdModel {
        feature: 0,
        threshold: 0.5,
        n: 2,
    };
    let specs: Vec<FeatureSpec> = (0..2)
        .map(|j| FeatureSpec {
            name: format!("x{}", j + 1),
            index: j,
            kind: FeatureKind::Continuous { min: 0.0, max: 1.0 },
            group: Group::Rest,
        })
        .collect();
    let context = audit::dataset::Dataset {
        specs,
        rows: vec![vec![0.7, 0.3]],
        labels: vec![1],
        label_names: ["0".into(), "1".into()],
    };
    let grid0 = feature_grid(&context.specs[0], 10).unwrap();
    let grid1 = feature_grid(&context.specs[1], 10).unwrap();
    let n1 = necessity_local(&model, &context.rows[0], 0, &grid0, &context, 0).unwrap();
    let n2 = necessity_local(&model, &context.rows[0], 1, &grid1, &context, 0).unwrap();
    assert_eq!(n1.value, 0.5);
    assert_eq!(n2.value, 0.0);

    // sufficiency: reference above the threshold, two candidates below it
    let candidates = audit::dataset::Dataset {
        rows: vec![
            vec![0.7, 0.3],
            vec![0.1, 0.9],
            vec![0.2, 0.4],
            vec![0.8, 0.1],
        ],
        labels: vec![1, 0, 0, 1],
        ..context.clone()
    };
    let s1 = sufficiency_local(&model, &candidates.rows[0], 0, &candidates, None, 0).unwrap();
    let s2 = sufficiency_local(&model, &candidates.rows[0], 1, &candidates, None, 0).unwrap();
    assert_eq!(s1.value, 1.0);
    assert_eq!(s2.value, 0.0);
    pass(3, "threshold necessity 0.5/0.0 and sufficiency 1.0/0.0 exact");
}

/// Forest output symmetrized over features 0 and 1.
struct SwapSym<'a> {
    inner: &'a TrainedModel,
}

impl Classifier for SwapSym<'_> {
    fn predict_proba(&self, x: &[f64]) -> f64 {
        let mut swapped = x.to_vec();
        swapped.swap(0, 1);
        0.5 * (self.inner.predict_proba(x) + self.inner.predict_proba(&swapped))
    }

    fn n_features(&self) -> usize {
        self.inner.n_features()
    }
}

/// Append a constant 1.0 column so the forest has a provably null player.
fn with_constant_column(mut data: audit::dataset::Dataset) -> audit::dataset::Dataset {
    let j = data.n_features();
    data.specs.push(FeatureSpec {
        name: "const".into(),
        index: j,
        kind: FeatureKind::Continuous { min: 1.0, max: 1.0 },
        group: Group::Rest,
    });
    for row in &mut data.rows {
        row.push(1.0);
    }
    data
}

#[test]
fn criterion_04_shapley_axioms_and_estimator_agreement() {
    let exact = ShapConfig {
        mode: ShapMode::Exact,
        background_size: 1000,
        ..Default::default()
    };
    for t in 0..100u64 {
        let d = 3 + (t as usize) % 6; // 3..=8
        let spec = PlantedSpec {
            d,
            relevant: vec![(0, 2.0), (1, 1.0)],
            rule: LabelRule::LinearThreshold,
            noise_rate: 0.1,
            seed: 1000 + t,
            levels: None,
        };
        let data = with_constant_column(generate_planted(&spec, 60).unwrap());
        let forest = train(ModelKind::RandomForest, &data, t).unwrap();
        let x = data.rows[0].clone();

        let attr = explain_shap(&forest, &x, &data, &exact, 0).unwrap();
        // efficiency: phi sums to f(x) minus the background mean output
        let base: f64 = data.rows.iter().map(|r| forest.predict_proba(r)).sum::<f64>()
            / data.n_rows() as f64;
        let total: f64 = attr.scores.iter().sum();
        assert!(
            (total - (forest.predict_proba(&x) - base)).abs() <= 1e-9,
            "efficiency violated on forest {t}"
        );
        // null player: the constant feature never changes any coalition value
        assert!(
            attr.scores[data.n_features() - 1].abs() <= 1e-9,
            "null player violated on forest {t}"
        );

        // symmetry: symmetrized model, x0 = x1, background closed under swap
        let sym = SwapSym { inner: &forest };
        let mut sx = x.clone();
        sx[1] = sx[0];
        let mut sym_bg = data.clone();
        sym_bg.rows.truncate(25);
        let swapped: Vec<Vec<f64>> = sym_bg
            .rows
            .iter()
            .map(|r| {
                let mut s = r.clone();
                s.swap(0, 1);
                s
            })
            .collect();
        sym_bg.rows.extend(swapped);
        let sym_attr = explain_shap(&sym, &sx, &sym_bg, &exact, 0).unwrap();
        assert!(
            (sym_attr.scores[0] - sym_attr.scores[1]).abs() <= 1e-9,
            "symmetry violated on forest {t}"
        );
    }

    // kernel mode with full coalition enumeration matches exact at d = 5
    let spec = PlantedSpec {
        d: 5,
        relevant: vec![(0, 2.0), (1, 1.0)],
        rule: LabelRule::LinearThreshold,
        noise_rate: 0.1,
        seed: 77,
        levels: None,
    };
    let data = generate_planted(&spec, 60).unwrap();
    let forest = train(ModelKind::RandomForest, &data, 77).unwrap();
    let x = &data.rows[3];
    let a = explain_shap(&forest, x, &data, &exact, 0).unwrap();
    let kernel = ShapConfig {
        mode: ShapMode::Kernel,
        coalitions: 64,
        background_size: 1000,
        seed: 0,
    };
    let b = explain_shap(&forest, x, &data, &kernel, 0).unwrap();
    for (u, v) in a.scores.iter().zip(&b.scores) {
        assert!((u - v).abs() <= 1e-6, "kernel/exact diverge: {u} vs {v}");
    }

    // exact mode matches the independent permutation oracle at d <= 6
    for d in 3..=6usize {
        let spec = PlantedSpec {
            d,
            relevant: vec![(0, 2.0), (1, 1.0)],
            rule: LabelRule::LinearThreshold,
            noise_rate: 0.1,
            seed: 500 + d as u64,
            levels: None,
        };
        let data = generate_planted(&spec, 50).unwrap();
        let forest = train(ModelKind::RandomForest, &data, 9).unwrap();
        let x = &data.rows[1];
        let fast = explain_shap(&forest, x, &data, &exact, 0).unwrap();
        let oracle = exact_shapley_reference(&forest, x, &data.rows).unwrap();
        for (u, v) in fast.scores.iter().zip(&oracle) {
            assert!((u - v).abs() <= 1e-9, "oracle diverges at d={d}: {u} vs {v}");
        }
    }
    pass(4, "efficiency/symmetry/null on 100 forests, kernel and oracle agree");
}

#[test]
fn criterion_05_lime_recovers_linear_rankings() {
    use rand::{Rng, SeedableRng};
    let d = 4;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4242);
    let rows: Vec<Vec<f64>> = (0..300)
        .map(|_| (0..d).map(|_| rng.gen_range(0.0..1.0)).collect())
        .collect();
    let background = audit::dataset::Dataset {
        specs: (0..d)
            .map(|j| FeatureSpec {
                name: format!("f{j}"),
                index: j,
                kind: FeatureKind::Continuous { min: 0.0, max: 1.0 },
                group: Group::Rest,
            })
            .collect(),
        rows,
        labels: vec![0; 300],
        label_names: ["0".into(), "1".into()],
    };
    // last coefficient zero: a null feature
    let model = LinearProbaModel {
        intercept: 0.3,
        coefs: vec![0.5, -0.35, 0.2, 0.0],
    };
    let stds: Vec<f64> = (0..d)
        .map(|j| {
            let mean: f64 =
                background.rows.iter().map(|r| r[j]).sum::<f64>() / background.n_rows() as f64;
            (background.rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>()
                / background.n_rows() as f64)
                .sqrt()
        })
        .collect();
    let expected = rank_by_magnitude(
        &model
            .coefs
            .iter()
            .zip(&stds)
            .map(|(c, s)| c * s)
            .collect::<Vec<_>>(),
    );
    let x = vec![0.5; d];
    let mut matches = 0;
    for seed in 0..100u64 {
        let cfg = LimeConfig {
            samples: 400,
            seed,
            ..Default::default()
        };
        let attr = explain_lime(&model, &x, &background, &cfg, 0).unwrap();
        if attr.ranking == expected {
            matches += 1;
        }
        assert_ne!(attr.ranking[0], 3, "null feature ranked first at seed {seed}");
    }
    assert!(matches >= 95, "ranking recovered in only {matches}/100 seeds");
    pass(5, "LIME matched |coef*std| ranking in >=95/100 seeds, null never first");
}

/// The planted rule itself as a classifier (hard 0/1 probability).
struct RuleModel {
    spec: PlantedSpec,
}

impl Classifier for RuleModel {
    fn predict_proba(&self, x: &[f64]) -> f64 {
        f64::from(self.spec.clean_label(x))
    }

    fn n_features(&self) -> usize {
        self.spec.d
    }
}

#[test]
fn criterion_06_planted_relevance_recovery() {
    let spec = PlantedSpec {
        d: 6,
        relevant: vec![(0, 2.0), (1, 1.0)],
        rule: LabelRule::LinearThreshold,
        noise_rate: 0.03,
        seed: 21,
        levels: None,
    };
    let data = generate_planted(&spec, 1000).unwrap();
    let split = data.split(0.7, 42).unwrap();
    let model = train(ModelKind::LogisticRegression, &split.train, 42).unwrap();
    let globals: Vec<f64> = (0..6)
        .map(|j| {
            necessity_global(&model, &split.test, j, 20, None)
                .unwrap()
                .value
        })
        .collect();
    let max_noise = globals[2..].iter().cloned().fold(0.0f64, f64::max);
    assert!(
        globals[0] - globals[1] >= 0.1,
        "relevant margin too small: {globals:?}"
    );
    assert!(
        globals[1] - max_noise >= 0.1,
        "noise margin too small: {globals:?}"
    );

    // true-effect ranking is perfectly monotone under the planted rule
    let rule = RuleModel { spec };
    let attrs: Vec<Attribution> = (0..split.test.n_rows())
        .map(|i| Attribution::new(i, Method::Shap, vec![2.0, 1.0, 0.4, 0.3, 0.2, 0.1]))
        .collect();
    let table = rank_wise_scores_from(
        &rule,
        "rule",
        "true_effect",
        "all",
        &attrs,
        &split.test,
        audit::scoring::ScoreKind::Necessity,
        20,
    )
    .unwrap();
    let verdict = monotonicity_check(&table, 1e-9);
    assert!(verdict.holds(), "violations: {:?}", verdict.violations);
    pass(6, "necessity orders planted relevance with margin, monotone ranks");
}

fn full_config(out: &std::path::Path) -> AuditConfig {
    let json = format!(
        r#"{{
        "data": {{"planted": {{
            "spec": {{"d": 8,
                      "relevant": [[0, 2.0], [1, 1.6], [2, 1.2], [3, 0.9], [4, 0.6]],
                      "rule": "linear_threshold", "noise_rate": 0.05, "seed": 13}},
            "rows": 220}}}},
        "settings": ["all", "high_level"],
        "scoring": {{"grid_n": 8}},
        "lime": {{"samples": 150, "seed": 5}},
        "shap": {{"mode": "exact", "background_size": 20, "seed": 5}},
        "output_dir": {:?}
    }}"#,
        out
    );
    serde_json::from_str(&json).unwrap()
}

#[test]
fn criterion_07_occurrence_invariant_and_published_witness() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_audit(&full_config(dir.path())).unwrap();
    assert!(!report.occurrence_tables.is_empty());
    for t in &report.occurrence_tables {
        for (ki, &k) in t.k_list.iter().enumerate() {
            let sum: usize = t.counts.iter().map(|row| row[ki]).sum();
            assert_eq!(
                sum,
                k * t.n_instances,
                "top-{k} column of {}/{}/{} does not sum to k*|test|",
                t.model,
                t.setting,
                t.explainer
            );
        }
    }
    // frozen arithmetic witness of the same invariant on a published table:
    // seven high-level top-3 counts over 101 test instances
    let witness = [101usize, 61, 27, 101, 0, 8, 5];
    let total: usize = witness.iter().sum();
    assert_eq!(total, 303);
    assert_eq!(total, 3 * 101);
    pass(7, "top-k counts sum to k*|test| everywhere, witness 303 = 3*101");
}

#[test]
fn criterion_08_protocol_shape() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_audit(&full_config(dir.path())).unwrap();
    assert!(
        report.skipped.is_empty(),
        "unexpected skips: {:?}",
        report.skipped
    );
    assert_eq!(report.accuracies.len(), 8, "4 models x 2 settings accuracies");
    for kind in [
        audit::scoring::ScoreKind::Necessity,
        audit::scoring::ScoreKind::Sufficiency,
    ] {
        let sets = report
            .global_scores
            .iter()
            .filter(|s| s.kind == kind)
            .count();
        assert_eq!(sets, 8, "4x2 global score sets per kind");
    }
    assert_eq!(report.rank_tables.len(), 32, "4x2x2x2 rank tables");
    assert_eq!(report.occurrence_tables.len(), 16, "4x2x2 occurrence tables");
    pass(8, "8 accuracies, 8 global sets per kind, 32 rank and 16 occurrence tables");
}

#[test]
fn criterion_09_reports_are_byte_identical_across_jobs() {
    let bin = env!("CARGO_BIN_EXE_audit");
    let work = tempfile::tempdir().unwrap();
    let cfg_path = work.path().join("config.json");
    let mut cfg = full_config(std::path::Path::new("out"));
    cfg.scoring.n_instances = Some(30);
    cfg.scoring.r_references = Some(30);
    std::fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();

    let mut reports = Vec::new();
    for jobs in ["1", "8"] {
        let cwd = work.path().join(format!("jobs{jobs}"));
        std::fs::create_dir(&cwd).unwrap();
        let status = std::process::Command::new(bin)
            .args(["run", "--config"])
            .arg(&cfg_path)
            .env("AUDIT_JOBS", jobs)
            .current_dir(&cwd)
            .stdout(std::process::Stdio::null())
            .status()
            .unwrap();
        assert!(status.success(), "audit run failed at jobs={jobs}");
        reports.push(std::fs::read(cwd.join("out/report.json")).unwrap());
    }
    assert_eq!(reports[0], reports[1], "report.json differs between job counts");
    pass(9, "report.json byte-identical at jobs=1 and jobs=8");
}

#[test]
fn criterion_10_score_bounds_and_undefined_handling() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_audit(&full_config(dir.path())).unwrap();
    for set in &report.global_scores {
        for s in &set.scores {
            assert!(
                (0.0..=1.0).contains(&s.value),
                "global {} out of bounds: {}",
                s.feature,
                s.value
            );
        }
    }
    for rt in &report.rank_tables {
        for e in &rt.table.entries {
            assert!(
                (0.0..=1.0).contains(&e.mean),
                "rank mean out of bounds: {}",
                e.mean
            );
        }
    }

    // undefined sufficiency is None (counted as skipped), never Some(0.0)
    let model = ThresholdModel {
        feature: 0,
        threshold: 0.5,
        n: 2,
    };
    let context = audit::dataset::Dataset {
        specs: (0..2)
            .map(|j| FeatureSpec {
                name: format!("f{j}"),
                index: j,
                kind: FeatureKind::Continuous { min: 0.0, max: 1.0 },
                group: Group::Rest,
            })
            .collect(),
        rows: vec![vec![0.9, 0.2], vec![0.1, 0.8]],
        labels: vec![1, 0],
        label_names: ["0".into(), "1".into()],
    };
    // excluding the only opposite-class row leaves K empty
    let s = sufficiency_local(&model, &context.rows[0], 0, &context, Some(1), 0);
    assert!(s.is_none(), "empty-K sufficiency must be undefined, not 0");
    pass(10, "all scores in [0,1]; empty-K sufficiency stays undefined");
}

#[test]
fn acceptance_suite_preconditions() {
    // the full config drives criteria 7, 8, 9, 10; both settings must keep
    // at least four features so every rank table can exist
    let cfg = full_config(std::path::Path::new("unused"));
    cfg.validate().unwrap();
    let data = audit::pipeline::resolve_dataset(&cfg).unwrap();
    let high = data.select_group(GroupFilter::HighLevel).unwrap();
    assert_eq!(high.n_features(), 5);
    let names: BTreeSet<String> = high.feature_names().into_iter().collect();
    assert!(names.contains("f0") && names.contains("f4"));
}
