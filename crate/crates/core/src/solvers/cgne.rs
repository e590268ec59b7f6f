use super::{check_shapes, cost_of, Observer, Recorder, Solution, SolverConfig, SolverKind};
use crate::error::{Error, Result};
use crate::linalg::{norm_sq, RowMatrix};

/// Recurrence residual is replaced by `b - Ax` this often.
const REFRESH: usize = 50;

/// Conjugate gradient on `AᵀA x = Aᵀb` in the two-term (CGLS) form: one
/// product with `A` and one with `Aᵀ` per iteration, `AᵀA` never formed.
pub fn solve_cgne(
    a: &RowMatrix,
    b: &[f64],
    x0: &[f64],
    config: &SolverConfig,
    observer: &mut impl Observer,
) -> Result<Solution> {
    check_shapes(a, b, x0)?;
    let budget = config.max_iterations;
    let mut rec = Recorder::new(config, 1, cost_of(a, SolverKind::Cgne, None));

    let mut x = x0.to_vec();
    let mut r = explicit_residual(a, b, &x);
    let mut s = a.tr_mul_vec(&r);
    let mut p = s.clone();
    let mut gamma = norm_sq(&s);
    let mut done = rec.record(0, a, b, &x, None, observer);
    let mut k = 0;
    while k < budget && !done && gamma > 0.0 {
        let q = a.mul_vec(&p);
        let curvature = norm_sq(&q);
        if !(curvature > f64::MIN_POSITIVE) || !curvature.is_finite() {
            return Err(Error::Breakdown(k));
        }
        let alpha = gamma / curvature;
        for (xj, &pj) in x.iter_mut().zip(&p) {
            *xj += alpha * pj;
        }
        k += 1;
        if k % REFRESH == 0 {
            r = explicit_residual(a, b, &x);
        } else {
            for (ri, &qi) in r.iter_mut().zip(&q) {
                *ri -= alpha * qi;
            }
        }
        a.tr_mul_vec_into(&r, &mut s);
        let gamma_next = norm_sq(&s);
        let beta = gamma_next / gamma;
        gamma = gamma_next;
        for (pj, &sj) in p.iter_mut().zip(&s) {
            *pj = sj + beta * *pj;
        }
        if rec.due(k, budget) || gamma == 0.0 {
            done = rec.record(k, a, b, &x, None, observer);
        }
    }
    if rec.last_k() != Some(k) {
        rec.record(k, a, b, &x, None, observer);
    }
    Ok(Solution {
        x,
        trace: rec.finish(),
        iterations: k,
    })
}

fn explicit_residual(a: &RowMatrix, b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut r = a.mul_vec(x);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_in_one_step() {
        let a = RowMatrix::identity(4);
        let b = [1.0, -2.0, 3.0, 0.5];
        let sol = solve_cgne(
            &a,
            &b,
            &[0.0; 4],
            &SolverConfig::with_iterations(10),
            &mut (),
        )
        .unwrap();
        assert_eq!(sol.iterations, 1);
        for j in 0..4 {
            assert!((sol.x[j] - b[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn orthogonal_in_one_step() {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let a = RowMatrix::from_rows(&[vec![c, c], vec![c, -c]]).unwrap();
        let b = a.mul_vec(&[2.0, -1.0]);
        let sol = solve_cgne(
            &a,
            &b,
            &[0.0; 2],
            &SolverConfig::with_iterations(10),
            &mut (),
        )
        .unwrap();
        assert!(sol.trace.at(1).unwrap().residual < 1e-14);
    }

    #[test]
    fn converges_within_rank_steps() {
        let a = RowMatrix::from_rows(&[
            vec![1.0, 2.0, 0.0, 1.0],
            vec![0.0, 1.0, 3.0, 0.0],
            vec![2.0, 0.0, 1.0, -1.0],
            vec![1.0, 1.0, 1.0, 1.0],
            vec![0.5, -1.0, 0.0, 2.0],
        ])
        .unwrap();
        let b = a.mul_vec(&[1.0, 2.0, -1.0, 0.5]);
        let cfg = SolverConfig::with_iterations(4);
        let sol = solve_cgne(&a, &b, &[0.0; 4], &cfg, &mut ()).unwrap();
        assert!(sol.trace.last().unwrap().residual < 1e-10);
        let ks: Vec<usize> = sol.trace.points.iter().map(|p| p.k).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn already_solved_stops_immediately() {
        let a = RowMatrix::identity(3);
        let sol = solve_cgne(
            &a,
            &[1.0; 3],
            &[1.0; 3],
            &SolverConfig::with_iterations(10),
            &mut (),
        )
        .unwrap();
        assert_eq!(sol.iterations, 0);
        assert_eq!(sol.trace.points.len(), 1);
    }
}
