//! Random forest: 100 trees, Gini impurity, unlimited depth, bootstrap
//! sampling, sqrt(d) feature candidates per split. Categorical features are
//! split natively by code equality; continuous by midpoint thresholds.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;

const N_TREES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SplitTest {
    /// Left branch iff x[feature] <= threshold.
    Threshold(f64),
    /// Left branch iff x[feature] == code.
    Equals(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Leaf {
        prob: f64,
    },
    Split {
        feature: usize,
        test: SplitTest,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    fn predict_proba(&self, x: &[f64]) -> f64 {
        let mut idx = 0;
        loop {
            match &self.nodes[idx] {
                Node::Leaf { prob } => return *prob,
                Node::Split {
                    feature,
                    test,
                    left,
                    right,
                } => {
                    let go_left = match test {
                        SplitTest::Threshold(t) => x[*feature] <= *t,
                        SplitTest::Equals(c) => x[*feature] == *c,
                    };
                    idx = if go_left { *left } else { *right };
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub trees: Vec<Tree>,
    pub n_features: usize,
    pub categorical: Vec<bool>,
}

impl ForestParams {
    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict_proba(x)).sum();
        sum / self.trees.len() as f64
    }
}

pub fn fit(data: &Dataset, seed: u64) -> ForestParams {
    let d = data.n_features();
    let categorical: Vec<bool> = data.specs.iter().map(|s| s.is_categorical()).collect();
    let mtry = ((d as f64).sqrt().floor() as usize).max(1);

    let trees = (0..N_TREES)
        .map(|t| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(seed.wrapping_add((t as u64).wrapping_mul(0x9E3779B9)));
            let sample: Vec<usize> = (0..data.n_rows())
                .map(|_| rng.gen_range(0..data.n_rows()))
                .collect();
            let mut nodes = Vec::new();
            build_node(data, &categorical, mtry, &sample, &mut nodes, &mut rng);
            Tree { nodes }
        })
        .collect();

    ForestParams {
        trees,
        n_features: d,
        categorical,
    }
}

fn gini(counts: [usize; 2]) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p1 = counts[1] as f64 / n;
    2.0 * p1 * (1.0 - p1)
}

struct BestSplit {
    feature: usize,
    test: SplitTest,
    score: f64,
}

/// Builds the subtree for `sample` (bootstrap row indices) and returns the
/// root node index within `nodes`.
fn build_node(
    data: &Dataset,
    categorical: &[bool],
    mtry: usize,
    sample: &[usize],
    nodes: &mut Vec<Node>,
    rng: &mut ChaCha8Rng,
) -> usize {
    let counts = class_counts(data, sample);
    let frac1 = counts[1] as f64 / sample.len() as f64;
    if counts[0] == 0 || counts[1] == 0 {
        nodes.push(Node::Leaf { prob: frac1 });
        return nodes.len() - 1;
    }

    let mut order: Vec<usize> = (0..data.n_features()).collect();
    order.shuffle(rng);

    // try mtry candidate features; keep scanning past mtry only while no
    // valid split has been found yet
    let mut best: Option<BestSplit> = None;
    let mut tried_with_split = 0;
    for &feature in &order {
        if tried_with_split >= mtry {
            break;
        }
        if let Some(split) = best_split_on_feature(data, categorical, sample, feature) {
            tried_with_split += 1;
            if best.as_ref().map_or(true, |b| split.score < b.score) {
                best = Some(split);
            }
        }
    }

    let Some(best) = best else {
        // all candidate features constant over the sample
        nodes.push(Node::Leaf { prob: frac1 });
        return nodes.len() - 1;
    };

    let (left_sample, right_sample): (Vec<usize>, Vec<usize>) =
        sample.iter().partition(|&&i| {
            let v = data.rows[i][best.feature];
            match best.test {
                SplitTest::Threshold(t) => v <= t,
                SplitTest::Equals(c) => v == c,
            }
        });

    let here = nodes.len();
    nodes.push(Node::Leaf { prob: frac1 }); // placeholder
    let left = build_node(data, categorical, mtry, &left_sample, nodes, rng);
    let right = build_node(data, categorical, mtry, &right_sample, nodes, rng);
    nodes[here] = Node::Split {
        feature: best.feature,
        test: best.test,
        left,
        right,
    };
    here
}

fn class_counts(data: &Dataset, sample: &[usize]) -> [usize; 2] {
    let mut counts = [0usize; 2];
    for &i in sample {
        counts[data.labels[i] as usize] += 1;
    }
    counts
}

fn best_split_on_feature(
    data: &Dataset,
    categorical: &[bool],
    sample: &[usize],
    feature: usize,
) -> Option<BestSplit> {
    let mut values: Vec<f64> = sample.iter().map(|&i| data.rows[i][feature]).collect();
    values.sort_by(f64::total_cmp);
    values.dedup();
    if values.len() < 2 {
        return None;
    }

    let total = sample.len() as f64;
    let mut best: Option<BestSplit> = None;
    let mut consider = |test: SplitTest| {
        let mut lc = [0usize; 2];
        let mut rc = [0usize; 2];
        for &i in sample {
            let v = data.rows[i][feature];
            let go_left = match test {
                SplitTest::Threshold(t) => v <= t,
                SplitTest::Equals(c) => v == c,
            };
            let counts = if go_left { &mut lc } else { &mut rc };
            counts[data.labels[i] as usize] += 1;
        }
        let nl = (lc[0] + lc[1]) as f64;
        let nr = (rc[0] + rc[1]) as f64;
        if nl == 0.0 || nr == 0.0 {
            return;
        }
        let score = (nl * gini(lc) + nr * gini(rc)) / total;
        if best.as_ref().map_or(true, |b| score < b.score) {
            best = Some(BestSplit {
                feature,
                test,
                score,
            });
        }
    };

    if categorical[feature] {
        for &code in &values {
            consider(SplitTest::Equals(code));
        }
    } else {
        for pair in values.windows(2) {
            consider(SplitTest::Threshold(0.5 * (pair[0] + pair[1])));
        }
    }
    best
}
