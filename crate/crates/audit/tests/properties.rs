//! Property-based invariants over the public API.

use proptest::prelude::*;

use audit::dataset::{feature_grid, FeatureKind, FeatureSpec, Group};
use audit::explain::rank_by_magnitude;
use audit::oracle::{generate_planted, LabelRule, PlantedSpec};
use audit::scoring::{necessity_local, sufficiency_local};
use audit::testutil::ThresholdModel;

fn continuous_spec(min: f64, max: f64) -> FeatureSpec {
    FeatureSpec {
        name: "f".into(),
        index: 0,
        kind: FeatureKind::Continuous { min, max },
        group: Group::Rest,
    }
}

proptest! {
    #[test]
    fn grid_is_sorted_and_spans_the_domain(
        min in -1e3f64..1e3,
        span in 1e-3f64..1e3,
        n in 2usize..64,
    ) {
        let max = min + span;
        let grid = feature_grid(&continuous_spec(min, max), n).unwrap();
        prop_assert_eq!(grid.len(), n);
        prop_assert!(grid.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(grid[0], min);
        prop_assert!((grid[n - 1] - max).abs() <= 1e-9 * span.max(1.0));
    }

    #[test]
    fn ranking_is_a_permutation_ordered_by_magnitude(
        scores in prop::collection::vec(-10.0f64..10.0, 1..12),
    ) {
        let ranking = rank_by_magnitude(&scores);
        let mut seen = ranking.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..scores.len()).collect::<Vec<_>>());
        for w in ranking.windows(2) {
            let (a, b) = (scores[w[0]].abs(), scores[w[1]].abs());
            prop_assert!(a > b || (a == b && w[0] < w[1]));
        }
    }

    #[test]
    fn split_partitions_rows_without_loss(
        rows in 20usize..80,
        ratio in 0.2f64..0.8,
        seed in any::<u64>(),
    ) {
        let spec = PlantedSpec {
            d: 3,
            relevant: vec![(0, 1.0)],
            rule: LabelRule::LinearThreshold,
            noise_rate: 0.0,
            seed: 5,
            levels: None,
        };
        let data = generate_planted(&spec, rows.max(50)).unwrap();
        let split = data.split(ratio, seed).unwrap();
        prop_assert_eq!(split.train.n_rows() + split.test.n_rows(), data.n_rows());
        let mut all: Vec<Vec<u64>> = split.train.rows.iter().chain(&split.test.rows)
            .map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
        let mut orig: Vec<Vec<u64>> = data.rows.iter()
            .map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
        all.sort();
        orig.sort();
        prop_assert_eq!(all, orig);
    }

    #[test]
    fn local_scores_stay_in_unit_interval(
        x0 in 0.0f64..1.0,
        x1 in 0.0f64..1.0,
        threshold in 0.1f64..0.9,
        grid_n in 2usize..32,
    ) {
        let model = ThresholdModel { feature: 0, threshold, n: 2 };
        let context = audit::dataset::Dataset {
            specs: vec![
                continuous_spec(0.0, 1.0),
                FeatureSpec { index: 1, ..continuous_spec(0.0, 1.0) },
            ],
            rows: vec![vec![x0, x1], vec![1.0 - x0, x1], vec![x1, x0]],
            labels: vec![0, 0, 0],
            label_names: ["0".into(), "1".into()],
        };
        for j in 0..2 {
            let grid = feature_grid(&context.specs[j], grid_n).unwrap();
            for i in 0..context.n_rows() {
                if let Ok(s) = necessity_local(&model, &context.rows[i], j, &grid, &context, i) {
                    prop_assert!((0.0..=1.0).contains(&s.value));
                }
                if let Some(s) = sufficiency_local(&model, &context.rows[i], j, &context, None, i) {
                    prop_assert!((0.0..=1.0).contains(&s.value));
                }
            }
        }
    }
}
