//! Exact expectations over a uniformly drawn row index, by summing all `m` outcomes.

use super::SpectralData;
use crate::linalg::{dist_sq, project_hyperplane, RowMatrix};

/// Returns `(lhs, rhs)` with
///
/// ```text
/// lhs = (1/m) Σ_i ‖a_i (a_iᵀy − b_i) / ‖a_i‖²‖²_{(AᵀA)⁺}
/// rhs = (1/m) ‖Ay − b‖²
/// ```
///
/// For unit rows `lhs ≤ rhs`, with equality when `A` is orthogonal.
pub fn check_lemma1(a: &RowMatrix, b: &[f64], y: &[f64], spectral: &SpectralData) -> (f64, f64) {
    let m = a.rows();
    let n = a.cols();
    let mut lhs = 0.0;
    let mut dense = vec![0.0; n];
    for i in 0..m {
        let row = a.row(i);
        let sq = a.row_sq_norms()[i];
        let r = (row.dot(y) - b[i]) / sq;
        if r == 0.0 {
            continue;
        }
        dense.iter_mut().for_each(|v| *v = 0.0);
        row.for_each(|j, v| dense[j] = v * r);
        lhs += spectral.weighted_norm_sq(&dense);
    }
    (lhs / m as f64, residual_sq(a, b, y) / m as f64)
}

/// Returns `(lhs, rhs)` with
///
/// ```text
/// lhs = (1/m) Σ_i ‖P_i(y) − x*‖²
/// rhs = ‖y − x*‖² − (1/m) ‖Ay − b‖²
/// ```
///
/// Equal for unit rows whenever `A x* = b`.
pub fn check_lemma2(a: &RowMatrix, b: &[f64], y: &[f64], x_star: &[f64]) -> (f64, f64) {
    let m = a.rows();
    let mut lhs = 0.0;
    for i in 0..m {
        let p = project_hyperplane(a.row(i), a.row_sq_norms()[i], b[i], y);
        lhs += dist_sq(&p, x_star);
    }
    (
        lhs / m as f64,
        dist_sq(y, x_star) - residual_sq(a, b, y) / m as f64,
    )
}

fn residual_sq(a: &RowMatrix, b: &[f64], y: &[f64]) -> f64 {
    (0..a.rows())
        .map(|i| (a.row(i).dot(y) - b[i]).powi(2))
        .sum()
}
