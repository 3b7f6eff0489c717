//! L2-regularized logistic regression fitted by Newton iterations on the
//! encoded (standardized / one-hot) feature space.

use serde::{Deserialize, Serialize};

use crate::linalg;

/// Penalty strength on the weights (intercept unpenalized), as a sum-of-NLL
/// objective: Σ nll_i + 0.5 * L2_PENALTY * ||w||².
const L2_PENALTY: f64 = 1.0;
const GRAD_TOL: f64 = 1e-8;
const MAX_ITERS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LogisticParams {
    pub fn predict_proba(&self, encoded: &[f64]) -> f64 {
        let z = self.bias
            + self
                .weights
                .iter()
                .zip(encoded)
                .map(|(w, x)| w * x)
                .sum::<f64>();
        sigmoid(z)
    }
}

pub fn fit(encoded_rows: &[Vec<f64>], labels: &[u8]) -> LogisticParams {
    let p = encoded_rows[0].len();
    let mut weights = vec![0.0; p];
    let mut bias = 0.0;
    let mut iterations = 0;

    for iter in 0..MAX_ITERS {
        iterations = iter + 1;
        // gradient of Σ nll + 0.5λ||w||², intercept column last
        let mut grad = vec![0.0; p + 1];
        let mut hess = vec![vec![0.0; p + 1]; p + 1];
        for (x, &y) in encoded_rows.iter().zip(labels) {
            let z = bias + weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            let prob = sigmoid(z);
            let resid = prob - y as f64;
            let s = (prob * (1.0 - prob)).max(1e-12);
            for j in 0..p {
                grad[j] += resid * x[j];
                for k in j..p {
                    hess[j][k] += s * x[j] * x[k];
                }
                hess[j][p] += s * x[j];
            }
            grad[p] += resid;
            hess[p][p] += s;
        }
        for j in 0..p {
            grad[j] += L2_PENALTY * weights[j];
            hess[j][j] += L2_PENALTY;
        }
        for j in 0..p + 1 {
            for k in 0..j {
                hess[j][k] = hess[k][j];
            }
        }
        let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm <= GRAD_TOL {
            break;
        }
        let Ok(step) = linalg::solve(hess, grad) else {
            break;
        };
        for j in 0..p {
            weights[j] -= step[j];
        }
        bias -= step[p];
    }

    LogisticParams {
        weights,
        bias,
        iterations,
    }
}
