//! Small dense linear solves used by the logistic trainer and the surrogate
//! fitters. Gaussian elimination with partial pivoting is plenty at these
//! sizes (tens of unknowns).

use crate::error::{AuditError, Result};

const PIVOT_EPS: f64 = 1e-12;

/// Solve `A x = b` in place for a square system. Errors on a pivot below
/// `PIVOT_EPS` (singular or near-singular).
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|r| r.len() == n));
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < PIVOT_EPS {
            return Err(AuditError::SingularSystem);
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in row + 1..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Weighted least squares with per-coefficient ridge penalties:
/// minimizes Σ w_i (y_i − x_i·β)² + Σ_j ridge_j β_j².
/// `xs` rows are design rows (caller appends an intercept column if wanted,
/// with a zero ridge entry to leave it unpenalized).
pub fn weighted_ridge(
    xs: &[Vec<f64>],
    ys: &[f64],
    ws: &[f64],
    ridge: &[f64],
) -> Result<Vec<f64>> {
    let p = xs[0].len();
    debug_assert_eq!(ridge.len(), p);
    let mut ata = vec![vec![0.0; p]; p];
    let mut atb = vec![0.0; p];
    for ((x, &y), &w) in xs.iter().zip(ys).zip(ws) {
        for j in 0..p {
            let wxj = w * x[j];
            atb[j] += wxj * y;
            for k in j..p {
                ata[j][k] += wxj * x[k];
            }
        }
    }
    for j in 0..p {
        for k in 0..j {
            ata[j][k] = ata[k][j];
        }
        ata[j][j] += ridge[j];
    }
    solve(ata, atb)
}
