//! Accelerated randomized Kaczmarz, in its three-sequence reference form and
//! the cheaper two-sequence form obtained by eliminating `v`.

use super::{check_shapes, cost_of, Observer, Recorder, Solution, SolverConfig, SolverKind};
use crate::error::Result;
use crate::linalg::RowMatrix;
use crate::rng::IndexStream;
use crate::schedule::{CoefficientStream, GammaRecurrence};

/// Reference form with explicit `x_k`, `y_k`, `v_k`:
///
/// ```text
/// y_k     = alpha_k v_k + (1 - alpha_k) x_k
/// x_{k+1} = y_k - s_k a_i,                 s_k = (a_i . y_k - b_i) / |a_i|^2
/// v_{k+1} = beta_k v_k + (1 - beta_k) y_k - gamma_k s_k a_i
/// ```
///
/// Mostly useful as the verification twin of [`solve_ark_efficient`]; the
/// observer receives `v_k` at every checkpoint.
pub fn solve_ark_reference(
    a: &RowMatrix,
    b: &[f64],
    lambda: f64,
    x0: &[f64],
    config: &SolverConfig,
    stream: &mut IndexStream,
    observer: &mut impl Observer,
) -> Result<Solution> {
    check_shapes(a, b, x0)?;
    let m = a.rows();
    let budget = config.max_iterations;
    let schedule = GammaRecurrence::new(m, lambda)?;
    let mut rec = Recorder::new(config, m, cost_of(a, SolverKind::ArkReference, None));

    let mut x = x0.to_vec();
    let mut v = x0.to_vec();
    let mut y = x0.to_vec();
    let mut done = rec.record(0, a, b, &x, Some(&v), observer);
    let mut k = 0;
    for step in schedule.take(budget) {
        if done {
            break;
        }
        let (alpha, beta, gamma) = (step.alpha, step.beta, step.gamma);
        for ((yj, &vj), &xj) in y.iter_mut().zip(&v).zip(&x) {
            *yj = alpha * vj + (1.0 - alpha) * xj;
        }
        let i = stream.next_index(m);
        let row = a.row(i);
        let s = (row.dot(&y) - b[i]) / a.row_sq_norms()[i];
        x.copy_from_slice(&y);
        row.axpy(-s, &mut x);
        for (vj, &yj) in v.iter_mut().zip(&y) {
            *vj = beta * *vj + (1.0 - beta) * yj;
        }
        row.axpy(-gamma * s, &mut v);
        k += 1;
        if rec.due(k, budget) {
            done = rec.record(k, a, b, &x, Some(&v), observer);
        }
    }
    Ok(Solution {
        x,
        trace: rec.finish(),
        iterations: k,
    })
}

/// Efficient form carrying only `x_k` and `y_k`:
///
/// ```text
/// s_k     = (a_i . y_k - b_i) / |a_i|^2
/// x_{k+1} = y_k - s_k a_i
/// y_{k+1} = P_k x_k + Q_k y_k - R_k s_k a_i
/// ```
///
/// Stored as `x_k` and `d_k = y_k - x_k`, which with `P_k + Q_k = 1` gives
/// `x_{k+1} = x_k + d_k - s_k a_i` and `d_{k+1} = -P_k d_k + (1 - R_k) s_k a_i`.
/// Holding `y_k` itself would be cheaper by one vector pass, but its rounding
/// error, seen through `v_k`, is divided by `alpha_k`; the residual then
/// stalls orders of magnitude above the reference form's floor.
pub fn solve_ark_efficient(
    a: &RowMatrix,
    b: &[f64],
    lambda: f64,
    x0: &[f64],
    config: &SolverConfig,
    stream: &mut IndexStream,
    observer: &mut impl Observer,
) -> Result<Solution> {
    check_shapes(a, b, x0)?;
    let m = a.rows();
    let budget = config.max_iterations;
    let coefficients = CoefficientStream::new(m, lambda)?;
    let mut rec = Recorder::new(config, m, cost_of(a, SolverKind::ArkEfficient, None));

    let mut x = x0.to_vec();
    let mut d = vec![0.0; x0.len()];
    let mut done = rec.record(0, a, b, &x, None, observer);
    let mut k = 0;
    for c in coefficients.take(budget) {
        if done {
            break;
        }
        let i = stream.next_index(m);
        let row = a.row(i);
        let s = (row.dot(&x) + row.dot(&d) - b[i]) / a.row_sq_norms()[i];
        for (xj, dj) in x.iter_mut().zip(d.iter_mut()) {
            *xj += *dj;
            *dj *= -c.p;
        }
        row.axpy(-s, &mut x);
        row.axpy((1.0 - c.r) * s, &mut d);
        k += 1;
        if rec.due(k, budget) {
            done = rec.record(k, a, b, &x, None, observer);
        }
    }
    Ok(Solution {
        x,
        trace: rec.finish(),
        iterations: k,
    })
}
