//! Gaussian naive Bayes on the encoded feature space, with variance
//! smoothing of 1e-9 times the largest per-feature variance.

use serde::{Deserialize, Serialize};

const VAR_SMOOTHING: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnbParams {
    pub log_prior: [f64; 2],
    pub means: [Vec<f64>; 2],
    pub variances: [Vec<f64>; 2],
}

impl GnbParams {
    pub fn predict_proba(&self, encoded: &[f64]) -> f64 {
        let log_joint: Vec<f64> = (0..2)
            .map(|c| {
                let mut lj = self.log_prior[c];
                for ((&x, &mu), &var) in encoded
                    .iter()
                    .zip(&self.means[c])
                    .zip(&self.variances[c])
                {
                    lj += -0.5 * ((2.0 * std::f64::consts::PI * var).ln() + (x - mu).powi(2) / var);
                }
                lj
            })
            .collect();
        let m = log_joint[0].max(log_joint[1]);
        let e0 = (log_joint[0] - m).exp();
        let e1 = (log_joint[1] - m).exp();
        e1 / (e0 + e1)
    }
}

pub fn fit(encoded_rows: &[Vec<f64>], labels: &[u8]) -> GnbParams {
    let p = encoded_rows[0].len();
    let n = encoded_rows.len() as f64;

    // smoothing floor from the pooled per-feature variance
    let mut global_mean = vec![0.0; p];
    for x in encoded_rows {
        for j in 0..p {
            global_mean[j] += x[j];
        }
    }
    for g in &mut global_mean {
        *g /= n;
    }
    let mut max_var = 0.0f64;
    for j in 0..p {
        let var = encoded_rows
            .iter()
            .map(|x| (x[j] - global_mean[j]).powi(2))
            .sum::<f64>()
            / n;
        max_var = max_var.max(var);
    }
    let eps = VAR_SMOOTHING * max_var.max(1e-300);

    let mut counts = [0usize; 2];
    let mut means = [vec![0.0; p], vec![0.0; p]];
    for (x, &y) in encoded_rows.iter().zip(labels) {
        let c = y as usize;
        counts[c] += 1;
        for j in 0..p {
            means[c][j] += x[j];
        }
    }
    for c in 0..2 {
        for j in 0..p {
            means[c][j] /= counts[c] as f64;
        }
    }
    let mut variances = [vec![0.0; p], vec![0.0; p]];
    for (x, &y) in encoded_rows.iter().zip(labels) {
        let c = y as usize;
        for j in 0..p {
            variances[c][j] += (x[j] - means[c][j]).powi(2);
        }
    }
    for c in 0..2 {
        for j in 0..p {
            variances[c][j] = variances[c][j] / counts[c] as f64 + eps;
        }
    }

    GnbParams {
        log_prior: [
            (counts[0] as f64 / n).ln(),
            (counts[1] as f64 / n).ln(),
        ],
        means,
        variances,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_gaussian_posterior() {
        // class means (0,0) vs (10,10), equal priors and variances:
        // x = (9,9) is far closer to class 1
        let params = GnbParams {
            log_prior: [0.5f64.ln(), 0.5f64.ln()],
            means: [vec![0.0, 0.0], vec![10.0, 10.0]],
            variances: [vec![1.0, 1.0], vec![1.0, 1.0]],
        };
        let p = params.predict_proba(&[9.0, 9.0]);
        assert!(p > 0.999, "posterior {p}");
        assert!(params.predict_proba(&[1.0, 1.0]) < 0.001);
        // midpoint is the decision boundary
        assert!((params.predict_proba(&[5.0, 5.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_class_means() {
        let rows = vec![
            vec![0.0, 1.0],
            vec![0.2, 0.8],
            vec![5.0, 5.2],
            vec![5.2, 5.0],
        ];
        let labels = vec![0, 0, 1, 1];
        let p = fit(&rows, &labels);
        assert!((p.means[0][0] - 0.1).abs() < 1e-12);
        assert!((p.means[1][0] - 5.1).abs() < 1e-12);
        assert!(p.predict_proba(&[5.1, 5.1]) > 0.99);
    }
}
