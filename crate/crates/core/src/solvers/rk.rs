use super::{check_shapes, cost_of, Observer, Recorder, Solution, SolverConfig, SolverKind};
use crate::error::Result;
use crate::linalg::{project_hyperplane_in_place, RowMatrix};
use crate::rng::IndexStream;

/// Randomized Kaczmarz: project the iterate onto the hyperplane of one uniformly drawn row.
pub fn solve_rk(
    a: &RowMatrix,
    b: &[f64],
    x0: &[f64],
    config: &SolverConfig,
    stream: &mut IndexStream,
    observer: &mut impl Observer,
) -> Result<Solution> {
    check_shapes(a, b, x0)?;
    let m = a.rows();
    let budget = config.max_iterations;
    let mut rec = Recorder::new(config, m, cost_of(a, SolverKind::Rk, None));
    let mut x = x0.to_vec();
    let mut done = rec.record(0, a, b, &x, None, observer);
    let mut k = 0;
    while k < budget && !done {
        step(a, b, &mut x, stream);
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

#[inline]
pub(crate) fn step(a: &RowMatrix, b: &[f64], x: &mut [f64], stream: &mut IndexStream) {
    let i = stream.next_index(a.rows());
    project_hyperplane_in_place(a.row(i), a.row_sq_norms()[i], b[i], x);
}
