//! Dense reference computations for small problems: the spectrum of `AᵀA`,
//! its pseudoinverse, projection onto the solution set, the theoretical
//! convergence envelopes, and exact expectations over the row index.
//!
//! Everything here is `O(n^2 m)` or worse and is meant for verification and
//! for overlaying theory on benchmark curves, never for solving.

mod bounds;
mod jacobi;
mod lemmas;

pub use bounds::{bound_envelope, BoundEnvelope, BoundKind};
pub use lemmas::{check_lemma1, check_lemma2};

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::linalg::{dot, residual_norm_unchecked, RowMatrix};
use jacobi::{orthogonalize, Columns};

/// Largest `min(m, n)` accepted by [`spectral_decompose`].
pub const MAX_DIM: usize = 2000;

/// Eigenvalues below `lambda_max * n * RANK_TOL` count as zero.
pub const RANK_TOL: f64 = 1e-12;

/// Nonzero eigenpairs of `AᵀA`, eigenvalues descending.
#[derive(Debug)]
pub struct SpectralData {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub rank: usize,
    n: usize,
    eigenvalues: Vec<f64>,
    /// `rank` unit vectors of length `n`, stored back to back.
    eigenvectors: Vec<f64>,
    pinv: OnceLock<Vec<f64>>,
}

impl Clone for SpectralData {
    fn clone(&self) -> Self {
        Self {
            lambda_min: self.lambda_min,
            lambda_max: self.lambda_max,
            rank: self.rank,
            n: self.n,
            eigenvalues: self.eigenvalues.clone(),
            eigenvectors: self.eigenvectors.clone(),
            pinv: OnceLock::new(),
        }
    }
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, j: usize) -> &[f64] {
        &self.eigenvectors[j * self.n..(j + 1) * self.n]
    }

    /// `(AᵀA)⁺` as a row-major `n x n` matrix, built on first use.
    pub fn pseudo_gram_inverse(&self) -> &[f64] {
        self.pinv.get_or_init(|| {
            let n = self.n;
            let mut out = vec![0.0; n * n];
            for (j, &lam) in self.eigenvalues.iter().enumerate() {
                let v = self.eigenvector(j);
                for (r, &vr) in v.iter().enumerate() {
                    let f = vr / lam;
                    if f == 0.0 {
                        continue;
                    }
                    for (o, &vc) in out[r * n..(r + 1) * n].iter_mut().zip(v) {
                        *o += f * vc;
                    }
                }
            }
            out
        })
    }

    /// `(AᵀA)⁺ v` without forming the pseudoinverse.
    pub fn apply_pinv(&self, v: &[f64]) -> Vec<f64> {
        self.apply_filtered(v, |lam| 1.0 / lam)
    }

    /// `(AᵀA)(AᵀA)⁺ v`: the orthogonal projection of `v` onto the row space.
    pub fn project_row_space(&self, v: &[f64]) -> Vec<f64> {
        self.apply_filtered(v, |_| 1.0)
    }

    fn apply_filtered(&self, v: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let e = self.eigenvector(j);
            let c = jacobi::dot(e, v) * f(lam);
            for (o, &ei) in out.iter_mut().zip(e) {
                *o += c * ei;
            }
        }
        out
    }

    /// `vᵀ(AᵀA)⁺v`.
    pub fn weighted_norm_sq(&self, v: &[f64]) -> f64 {
        self.eigenvalues
            .iter()
            .enumerate()
            .map(|(j, &lam)| jacobi::dot(self.eigenvector(j), v).powi(2) / lam)
            .sum()
    }
}

/// Eigen-decomposition of `AᵀA` via one-sided Jacobi on `A` (or on `Aᵀ` when
/// `A` is wide, so the work is always on `min(m, n)` vectors).
pub fn spectral_decompose(a: &RowMatrix) -> Result<SpectralData> {
    let (m, n) = (a.rows(), a.cols());
    if m.min(n) > MAX_DIM {
        return Err(Error::TooLarge {
            rows: m,
            cols: n,
            limit: MAX_DIM,
        });
    }
    let dense = a.to_dense();
    let mut pairs: Vec<(f64, Vec<f64>)> = if m >= n {
        // columns of A; right singular vectors accumulate in W
        let mut data = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                data[j * m + i] = dense[i * n + j];
            }
        }
        let mut b = Columns { len: m, data };
        let mut w = Columns {
            len: n,
            data: identity(n),
        };
        orthogonalize(&mut b, Some(&mut w))?;
        (0..n)
            .map(|j| (jacobi::dot(b.col(j), b.col(j)), w.col(j).to_vec()))
            .collect()
    } else {
        // rows of A; after orthogonalization they are sigma_j v_j
        let mut b = Columns {
            len: n,
            data: dense,
        };
        orthogonalize(&mut b, None)?;
        (0..m)
            .map(|j| {
                let c = b.col(j);
                let s2 = jacobi::dot(c, c);
                let s = s2.sqrt();
                let v = if s > 0.0 {
                    c.iter().map(|x| x / s).collect()
                } else {
                    vec![0.0; n]
                };
                (s2, v)
            })
            .collect()
    };
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let lambda_max = pairs.first().map_or(0.0, |p| p.0);
    let cutoff = lambda_max * n as f64 * RANK_TOL;
    pairs.retain(|p| p.0 > cutoff && p.0 > 0.0);
    if pairs.is_empty() {
        return Err(Error::NumericalFailure(
            "AᵀA has no nonzero eigenvalues".into(),
        ));
    }
    let rank = pairs.len();
    let mut eigenvalues = Vec::with_capacity(rank);
    let mut eigenvectors = Vec::with_capacity(rank * n);
    for (lam, v) in pairs {
        eigenvalues.push(lam);
        eigenvectors.extend(v);
    }
    Ok(SpectralData {
        lambda_min: *eigenvalues.last().unwrap(),
        lambda_max,
        rank,
        n,
        eigenvalues,
        eigenvectors,
        pinv: OnceLock::new(),
    })
}

/// Thin SVD of a row-major `m x n` matrix with `m >= n`; factors are
/// column-major and singular values descending.
pub(crate) struct Svd {
    pub u: Vec<f64>,
    pub s: Vec<f64>,
    pub v: Vec<f64>,
}

pub(crate) fn svd_tall(dense: &[f64], m: usize, n: usize) -> Result<Svd> {
    debug_assert!(m >= n && dense.len() == m * n);
    let mut data = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            data[j * m + i] = dense[i * n + j];
        }
    }
    let mut b = Columns { len: m, data };
    let mut w = Columns {
        len: n,
        data: identity(n),
    };
    orthogonalize(&mut b, Some(&mut w))?;
    let mut order: Vec<(f64, usize)> = (0..n)
        .map(|j| (jacobi::dot(b.col(j), b.col(j)).sqrt(), j))
        .collect();
    order.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut svd = Svd {
        u: Vec::with_capacity(m * n),
        s: Vec::with_capacity(n),
        v: Vec::with_capacity(n * n),
    };
    for (sigma, j) in order {
        if sigma == 0.0 {
            return Err(Error::NumericalFailure("matrix is rank deficient".into()));
        }
        svd.u.extend(b.col(j).iter().map(|x| x / sigma));
        svd.s.push(sigma);
        svd.v.extend_from_slice(w.col(j));
    }
    Ok(svd)
}

fn identity(n: usize) -> Vec<f64> {
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        d[i * n + i] = 1.0;
    }
    d
}

/// `x + (AᵀA)⁺Aᵀ(b - Ax)`: the point of `{z : Az = b}` closest to `x`.
pub fn project_solution_set(
    a: &RowMatrix,
    b: &[f64],
    x: &[f64],
    spectral: &SpectralData,
) -> Result<Vec<f64>> {
    if b.len() != a.rows() || x.len() != a.cols() || spectral.dim() != a.cols() {
        return Err(Error::ShapeMismatch(format!(
            "A is {}x{}, b has {}, x has {}, spectral is for n = {}",
            a.rows(),
            a.cols(),
            b.len(),
            x.len(),
            spectral.dim()
        )));
    }
    let mut r = a.mul_vec(x);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let step = spectral.apply_pinv(&a.tr_mul_vec(&r));
    let out: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + si).collect();
    let res = residual_norm_unchecked(a, &out, b);
    let scale = dot(b, b).sqrt().max(1.0);
    if res > 1e-8 * scale {
        return Err(Error::Inconsistent(res));
    }
    Ok(out)
}

/// `vᵀ(AᵀA)⁺v`.
pub fn weighted_norm_sq(v: &[f64], spectral: &SpectralData) -> f64 {
    spectral.weighted_norm_sq(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn gaussian(m: usize, n: usize, seed: u64) -> RowMatrix {
        let mut rng = SplitMix64::new(seed);
        RowMatrix::from_dense(m, n, (0..m * n).map(|_| rng.next_normal()).collect()).unwrap()
    }

    fn gram(a: &RowMatrix) -> Vec<f64> {
        let (m, n) = (a.rows(), a.cols());
        let d = a.to_dense();
        let mut g = vec![0.0; n * n];
        for i in 0..m {
            for r in 0..n {
                for c in 0..n {
                    g[r * n + c] += d[i * n + r] * d[i * n + c];
                }
            }
        }
        g
    }

    fn matmul(x: &[f64], y: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let xik = x[i * n + k];
                for j in 0..n {
                    out[i * n + j] += xik * y[k * n + j];
                }
            }
        }
        out
    }

    fn frob(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn identity_spectrum() {
        let s = spectral_decompose(&RowMatrix::identity(3)).unwrap();
        assert_eq!(s.rank, 3);
        assert!((s.lambda_min - 1.0).abs() < 1e-15 && (s.lambda_max - 1.0).abs() < 1e-15);
        let p = s.pseudo_gram_inverse();
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((p[i * 3 + j] - e).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rank_deficient_two_by_two() {
        let a = RowMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let s = spectral_decompose(&a).unwrap();
        assert_eq!(s.rank, 1);
        assert!((s.lambda_min - 2.0).abs() < 1e-15);
        assert!((s.lambda_max - 2.0).abs() < 1e-15);
        let p = s.pseudo_gram_inverse();
        let expect = [0.5, 0.0, 0.0, 0.0];
        for (x, e) in p.iter().zip(expect) {
            assert!((x - e).abs() < 1e-15);
        }
    }

    #[test]
    fn penrose_conditions() {
        for (m, n) in [(30, 20), (20, 30), (25, 25)] {
            let a = gaussian(m, n, (m * 100 + n) as u64);
            let s = spectral_decompose(&a).unwrap();
            assert_eq!(s.rank, m.min(n));
            let g = gram(&a);
            let p = s.pseudo_gram_inverse();
            let gpg = matmul(&matmul(&g, p, n), &g, n);
            let pgp = matmul(&matmul(p, &g, n), p, n);
            let diff = |x: &[f64], y: &[f64]| {
                frob(&x.iter().zip(y).map(|(a, b)| a - b).collect::<Vec<_>>())
            };
            assert!(diff(&gpg, &g) <= 1e-8 * frob(&g));
            assert!(diff(&pgp, p) <= 1e-8 * frob(p));
            let gp = matmul(&g, p, n);
            let pg = matmul(p, &g, n);
            let gp_t: Vec<f64> = (0..n * n).map(|k| gp[(k % n) * n + k / n]).collect();
            let pg_t: Vec<f64> = (0..n * n).map(|k| pg[(k % n) * n + k / n]).collect();
            assert!(diff(&gp, &gp_t) <= 1e-8 * frob(&gp));
            assert!(diff(&pg, &pg_t) <= 1e-8 * frob(&pg));
        }
    }

    #[test]
    fn lambda_min_is_inverse_pinv_norm() {
        let a = gaussian(40, 15, 3);
        let s = spectral_decompose(&a).unwrap();
        // largest eigenvalue of the pseudoinverse by power iteration on the
        // explicit matrix
        let p = s.pseudo_gram_inverse();
        let n = 15;
        let mut v = vec![1.0; n];
        let mut est = 0.0;
        for _ in 0..2000 {
            let mut w = vec![0.0; n];
            for i in 0..n {
                w[i] = dot(&p[i * n..(i + 1) * n], &v);
            }
            est = dot(&w, &w).sqrt();
            v = w.iter().map(|x| x / est).collect();
        }
        assert!((1.0 / est - s.lambda_min).abs() <= 1e-8 * s.lambda_min);
    }

    #[test]
    fn eigenvalues_sum_to_trace() {
        let a = gaussian(12, 30, 9);
        let s = spectral_decompose(&a).unwrap();
        let fro: f64 = a.to_dense().iter().map(|x| x * x).sum();
        let total: f64 = s.eigenvalues().iter().sum();
        assert!((total - fro).abs() < 1e-10 * fro);
    }

    #[test]
    fn too_large_guard() {
        let a = RowMatrix::identity(MAX_DIM + 1);
        assert!(matches!(
            spectral_decompose(&a),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn projection_examples() {
        let a = RowMatrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let s = spectral_decompose(&a).unwrap();
        let p = project_solution_set(&a, &[2.0], &[0.0, 7.0], &s).unwrap();
        assert!((p[0] - 2.0).abs() < 1e-15 && (p[1] - 7.0).abs() < 1e-15);

        let a = gaussian(10, 6, 4);
        let xs: Vec<f64> = (0..6).map(|j| j as f64).collect();
        let b = a.mul_vec(&xs);
        let s = spectral_decompose(&a).unwrap();
        let p = project_solution_set(&a, &b, &xs, &s).unwrap();
        for j in 0..6 {
            assert!((p[j] - xs[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn projection_is_idempotent() {
        let a = gaussian(8, 14, 5);
        let b = a.mul_vec(&vec![1.0; 14]);
        let s = spectral_decompose(&a).unwrap();
        let x0: Vec<f64> = (0..14).map(|j| (j as f64).sin()).collect();
        let p1 = project_solution_set(&a, &b, &x0, &s).unwrap();
        let p2 = project_solution_set(&a, &b, &p1, &s).unwrap();
        for j in 0..14 {
            assert!((p1[j] - p2[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn inconsistent_system_detected() {
        let a = RowMatrix::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let s = spectral_decompose(&a).unwrap();
        let err = project_solution_set(&a, &[1.0, 2.0], &[0.0, 0.0], &s).unwrap_err();
        assert!(matches!(err, Error::Inconsistent(_)));
    }

    #[test]
    fn weighted_norm_examples() {
        let s = spectral_decompose(&RowMatrix::identity(4)).unwrap();
        assert_eq!(weighted_norm_sq(&[0.0; 4], &s), 0.0);
        let v = [1.0, -2.0, 0.5, 3.0];
        assert!((weighted_norm_sq(&v, &s) - dot(&v, &v)).abs() < 1e-14);
    }
}
