//! Row-oriented matrix storage and the handful of vector kernels the solvers need.

mod matrix;
pub mod mmio;

pub use matrix::{DensityReport, Row, RowMatrix};

use crate::error::{Error, Result};

/// Rows with squared norm below this are treated as zero rows.
pub const ZERO_ROW_TOL: f64 = 1e-300;

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm_sq(x: &[f64]) -> f64 {
    dot(x, x)
}

#[inline]
pub fn norm(x: &[f64]) -> f64 {
    norm_sq(x).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

/// Shortest round-trip text for `x`: plain decimal in `[1e-4, 1e15)`, exponent
/// form elsewhere (so subnormals stay short).
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub fn dist_sq(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Orthogonal projection of `x` onto the hyperplane `{r : row . r = rhs}`.
///
/// Only coordinates in the row's support change.
pub fn project_hyperplane(row: Row<'_>, sq_norm: f64, rhs: f64, x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    project_hyperplane_in_place(row, sq_norm, rhs, &mut out);
    out
}

/// In-place form of [`project_hyperplane`]; returns the step scalar
/// `s = (row . x - rhs) / sq_norm` that was removed along the row.
#[inline]
pub fn project_hyperplane_in_place(row: Row<'_>, sq_norm: f64, rhs: f64, x: &mut [f64]) -> f64 {
    debug_assert!(sq_norm > 0.0);
    let s = (row.dot(x) - rhs) / sq_norm;
    if s != 0.0 {
        row.axpy(-s, x);
    }
    s
}

/// `||Ax - b||_2`
pub fn residual_norm(a: &RowMatrix, x: &[f64], b: &[f64]) -> Result<f64> {
    if x.len() != a.cols() || b.len() != a.rows() {
        return Err(Error::ShapeMismatch(format!(
            "A is {}x{}, x has {}, b has {}",
            a.rows(),
            a.cols(),
            x.len(),
            b.len()
        )));
    }
    Ok(residual_norm_unchecked(a, x, b))
}

pub(crate) fn residual_norm_unchecked(a: &RowMatrix, x: &[f64], b: &[f64]) -> f64 {
    (0..a.rows())
        .map(|i| {
            let r = a.row(i).dot(x) - b[i];
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

/// Rescales every row (and the matching entry of `b`) to unit Euclidean norm.
///
/// Rows whose norm is already exactly one are copied untouched.
pub fn normalize_rows(a: &RowMatrix, b: &[f64]) -> Result<(RowMatrix, Vec<f64>)> {
    if b.len() != a.rows() {
        return Err(Error::ShapeMismatch(format!(
            "b has {} entries, A has {} rows",
            b.len(),
            a.rows()
        )));
    }
    let norms: Vec<f64> = a.row_sq_norms().iter().map(|s| s.sqrt()).collect();
    if let Some(i) = a.row_sq_norms().iter().position(|&s| s < ZERO_ROW_TOL) {
        return Err(Error::ZeroRow(i));
    }
    let scaled = a.scale_rows(|i| if norms[i] == 1.0 { 1.0 } else { 1.0 / norms[i] })?;
    let b = b
        .iter()
        .zip(&norms)
        .map(|(&bi, &nrm)| if nrm == 1.0 { bi } else { bi / nrm })
        .collect();
    Ok((scaled, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text_round_trips() {
        for x in [
            0.0,
            -0.0,
            1.5,
            1e-4,
            9.99e-5,
            123456.789,
            1e15,
            5e-324,
            -2.5e-310,
            f64::MAX,
            0.1 + 0.2,
        ] {
            let t = format_f64(x);
            assert_eq!(t.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{t}");
            assert!(t.len() <= 24, "{t}");
        }
        assert_eq!(format_f64(800.0), "800");
        assert_eq!(format_f64(1e-7), "1e-7");
    }
    use crate::rng::SplitMix64;

    fn gaussian(m: usize, n: usize, seed: u64) -> RowMatrix {
        let mut rng = SplitMix64::new(seed);
        let data = (0..m * n).map(|_| rng.next_normal()).collect();
        RowMatrix::from_dense(m, n, data).unwrap()
    }

    #[test]
    fn normalize_three_four_five() {
        let a = RowMatrix::from_dense(1, 2, vec![3.0, 4.0]).unwrap();
        let (an, bn) = normalize_rows(&a, &[10.0]).unwrap();
        assert!((an.row(0).get(0) - 0.6).abs() < 1e-15);
        assert!((an.row(0).get(1) - 0.8).abs() < 1e-15);
        assert!((bn[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn normalize_unit_rows_is_bitwise_identity() {
        let a = RowMatrix::from_dense(
            3,
            4,
            vec![
                1.0, 0.0, 0.0, 0.0, //
                0.0, -1.0, 0.0, 0.0, //
                0.5, 0.5, 0.5, -0.5,
            ],
        )
        .unwrap();
        let b = [0.1, 0.2, 0.3];
        let (an, bn) = normalize_rows(&a, &b).unwrap();
        assert_eq!(an, a);
        assert_eq!(bn, b);
    }

    #[test]
    fn normalize_gaussian_rows() {
        let a = gaussian(10, 5, 1);
        let b = vec![1.0; 10];
        let (an, _) = normalize_rows(&a, &b).unwrap();
        for i in 0..10 {
            let recomputed: f64 = an.row(i).to_dense(5).iter().map(|v| v * v).sum();
            assert!((recomputed - 1.0).abs() < 1e-12);
            assert!((an.row_sq_norms()[i] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_preserves_solution_set() {
        let a = gaussian(20, 8, 2);
        let mut rng = SplitMix64::new(3);
        let x: Vec<f64> = (0..8).map(|_| rng.next_normal()).collect();
        let b = a.mul_vec(&x);
        let (an, bn) = normalize_rows(&a, &b).unwrap();
        assert!(residual_norm(&an, &x, &bn).unwrap() <= 1e-10);
    }

    #[test]
    fn normalize_shape_mismatch() {
        let a = gaussian(3, 2, 1);
        assert!(matches!(
            normalize_rows(&a, &[1.0]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn projection_examples() {
        let e1 = RowMatrix::from_dense(1, 2, vec![1.0, 0.0]).unwrap();
        assert_eq!(
            project_hyperplane(e1.row(0), 1.0, 5.0, &[1.0, 2.0]),
            vec![5.0, 2.0]
        );

        let a = RowMatrix::from_dense(1, 2, vec![0.6, 0.8]).unwrap();
        let sq = a.row_sq_norms()[0];
        let r = project_hyperplane(a.row(0), sq, 2.0, &[0.0, 0.0]);
        assert!((r[0] - 1.2).abs() < 1e-12 && (r[1] - 1.6).abs() < 1e-12);
        assert!((a.row(0).dot(&r) - 2.0).abs() < 1e-12);

        // already on the hyperplane: exact no-op
        let x = [1.0, 1.0];
        let on = project_hyperplane(e1.row(0), 1.0, 1.0, &x);
        assert_eq!(on, x);
    }

    #[test]
    fn projection_touches_only_support() {
        let a = RowMatrix::from_triplets(1, 6, vec![(0, 1, 2.0), (0, 4, -1.0)]).unwrap();
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let r = project_hyperplane(a.row(0), a.row_sq_norms()[0], 0.5, &x);
        for j in [0, 2, 3, 5] {
            assert_eq!(r[j], x[j]);
        }
        assert!((a.row(0).dot(&r) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn residual_examples() {
        let eye = RowMatrix::identity(2);
        let r = residual_norm(&eye, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
        assert!(residual_norm(&eye, &[0.0], &[1.0, 1.0]).is_err());
    }

    #[test]
    fn residual_matches_dense_evaluation() {
        let a = gaussian(20, 10, 4);
        let mut rng = SplitMix64::new(5);
        let x: Vec<f64> = (0..10).map(|_| rng.next_normal()).collect();
        let b: Vec<f64> = (0..20).map(|_| rng.next_normal()).collect();
        // independent evaluation from the raw dense buffer, column-major loop order
        let dense = a.to_dense();
        let mut ax = vec![0.0; 20];
        for j in 0..10 {
            for i in 0..20 {
                ax[i] += dense[i * 10 + j] * x[j];
            }
        }
        let expected = ax
            .iter()
            .zip(&b)
            .map(|(p, q)| (p - q) * (p - q))
            .sum::<f64>()
            .sqrt();
        let got = residual_norm(&a, &x, &b).unwrap();
        assert!((got - expected).abs() <= 1e-13 * expected);
    }

    #[test]
    fn planted_solution_has_tiny_residual() {
        let a = gaussian(30, 10, 6);
        let mut rng = SplitMix64::new(7);
        let x: Vec<f64> = (0..10).map(|_| rng.next_normal()).collect();
        let b = a.mul_vec(&x);
        assert!(residual_norm(&a, &x, &b).unwrap() <= 1e-12 * norm(&b));
    }
}
