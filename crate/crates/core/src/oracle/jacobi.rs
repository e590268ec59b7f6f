//! One-sided (Hestenes) Jacobi orthogonalization.
//!
//! Rotating pairs of columns until they are mutually orthogonal yields
//! `B W = U Σ` with `W` orthogonal. Only the column norms and, optionally,
//! the accumulated `W` are needed here.

use crate::error::{Error, Result};

pub(crate) const MAX_SWEEPS: usize = 100;

/// Column-major dense block: `cols` columns of length `len`, each contiguous.
pub(crate) struct Columns {
    pub len: usize,
    pub data: Vec<f64>,
}

impl Columns {
    pub fn count(&self) -> usize {
        if self.len == 0 {
            0
        } else {
            self.data.len() / self.len
        }
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.len..(j + 1) * self.len]
    }

    fn pair_mut(&mut self, p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
        debug_assert!(p < q);
        let len = self.len;
        let (lo, hi) = self.data.split_at_mut(q * len);
        (&mut lo[p * len..(p + 1) * len], &mut hi[..len])
    }
}

/// Orthogonalizes the columns of `b` in place; if `w` is given, applies the
/// same rotations to it. Returns the number of sweeps used.
pub(crate) fn orthogonalize(b: &mut Columns, mut w: Option<&mut Columns>) -> Result<usize> {
    let k = b.count();
    let tol = f64::EPSILON * (b.len.max(1) as f64).sqrt();
    let mut norms: Vec<f64> = (0..k).map(|j| dot(b.col(j), b.col(j))).collect();
    // Columns below this are rounding residue of a rank deficiency: left alone,
    // pairs of them keep rotating forever. The floor sits far under the rank cutoff.
    let len = b.len.max(1) as f64;
    let floor = norms.iter().sum::<f64>() * (len * f64::EPSILON).powi(2);
    for sweep in 1..=MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let (alpha, beta) = (norms[p], norms[q]);
                if alpha <= floor || beta <= floor {
                    continue;
                }
                let (cp, cq) = b.pair_mut(p, q);
                let gamma = dot(cp, cq);
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(cp, cq, c, s);
                norms[p] = alpha - t * gamma;
                norms[q] = beta + t * gamma;
                if let Some(w) = w.as_deref_mut() {
                    let (wp, wq) = w.pair_mut(p, q);
                    rotate(wp, wq, c, s);
                }
            }
        }
        // the incremental norm updates drift; refresh once per sweep
        for (j, nj) in norms.iter_mut().enumerate() {
            *nj = dot(b.col(j), b.col(j));
        }
        if !rotated {
            return Ok(sweep);
        }
    }
    Err(Error::NumericalFailure(format!(
        "Jacobi did not converge in {MAX_SWEEPS} sweeps"
    )))
}

#[inline]
fn rotate(x: &mut [f64], y: &mut [f64], c: f64, s: f64) {
    for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
        let (a, b) = (*xi, *yi);
        *xi = c * a - s * b;
        *yi = s * a + c * b;
    }
}

/// Four independent accumulators so the loop vectorizes.
#[inline]
pub(crate) fn dot(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = x.len() / 4;
    for i in 0..chunks {
        for l in 0..4 {
            acc[l] += x[4 * i + l] * y[4 * i + l];
        }
    }
    let mut tail = 0.0;
    for i in 4 * chunks..x.len() {
        tail += x[i] * y[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> Columns {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Columns { len: n, data }
    }

    #[test]
    fn two_by_two_singular_values() {
        // columns (3, 4) and (4, 3): singular values 7 and 1
        let mut b = Columns {
            len: 2,
            data: vec![3.0, 4.0, 4.0, 3.0],
        };
        let mut w = identity(2);
        orthogonalize(&mut b, Some(&mut w)).unwrap();
        let mut s: Vec<f64> = (0..2).map(|j| dot(b.col(j), b.col(j)).sqrt()).collect();
        s.sort_by(f64::total_cmp);
        assert!((s[0] - 1.0).abs() < 1e-14 && (s[1] - 7.0).abs() < 1e-14);
        assert!(dot(w.col(0), w.col(1)).abs() < 1e-15);
    }

    #[test]
    fn rank_deficient_input_converges() {
        // columns c, 2c, c + d, d with c, d generic: rank 2
        let c = [0.3, -1.2, 0.7, 2.0, 0.1, -0.4];
        let d = [1.0, 0.5, -0.25, 0.0, 1.5, 0.2];
        let mut data = Vec::new();
        for j in 0..4 {
            for i in 0..6 {
                data.push(match j {
                    0 => c[i],
                    1 => 2.0 * c[i],
                    2 => c[i] + d[i],
                    _ => d[i],
                });
            }
        }
        let mut b = Columns { len: 6, data };
        orthogonalize(&mut b, None).unwrap();
        let mut s: Vec<f64> = (0..4).map(|j| dot(b.col(j), b.col(j)).sqrt()).collect();
        s.sort_by(f64::total_cmp);
        assert!(s[0] < 1e-13 && s[1] < 1e-13 && s[2] > 0.1);
    }

    #[test]
    fn orthogonal_input_needs_one_sweep() {
        let mut b = identity(5);
        assert_eq!(orthogonalize(&mut b, None).unwrap(), 1);
    }

    #[test]
    fn dot_handles_tails() {
        let x: Vec<f64> = (0..7).map(|i| i as f64).collect();
        assert_eq!(dot(&x, &x), 91.0);
    }
}
