//! Accelerated Kaczmarz with cached updates for sparse rows.
//!
//! Within a cycle started at iterate `k` the iterates are held implicitly as
//!
//! ```text
//! x_{k+t} = x_bar + theta_t d_bar + z_t
//! y_{k+t} = x_bar + phi_t   d_bar + w_t
//! ```
//!
//! where `z_t`, `w_t` are nonzero only on the union of the row supports drawn
//! so far in the cycle. Each iteration touches that union plus one row; the
//! explicit pair is rebuilt every `T` iterations at `O(n)` cost. As in
//! [`solve_ark_efficient`](super::solve_ark_efficient), the pair is `x` and
//! `d = y - x` rather than `x` and `y`, which keeps rounding in the momentum
//! proportional to the (shrinking) gap between the two sequences.

use super::{
    check_shapes, cost_of, CycleLength, Observer, Recorder, Solution, SolverConfig, SolverKind,
};
use crate::error::{Error, Result};
use crate::linalg::{residual_norm_unchecked, RowMatrix};
use crate::rng::IndexStream;
use crate::schedule::CoefficientStream;

/// Concrete cycle length for `a`. `Auto` is `max(1, round(2/sqrt(delta)))`.
pub fn resolve_cycle(a: &RowMatrix, cycle: CycleLength) -> Result<usize> {
    match cycle {
        CycleLength::Fixed(0) => Err(Error::InvalidCycle),
        CycleLength::Fixed(t) => Ok(t),
        CycleLength::Auto => Ok(auto_cycle(a.delta())),
    }
}

pub(crate) fn auto_cycle(delta: f64) -> usize {
    ((2.0 / delta.sqrt()).round() as usize).max(1)
}

/// Implicit cycle representation; `active` lists the coordinates where
/// `z`/`w` may be nonzero, `in_active` is its membership mask.
struct Cycle {
    x_bar: Vec<f64>,
    d_bar: Vec<f64>,
    theta: f64,
    phi: f64,
    z: Vec<f64>,
    w: Vec<f64>,
    active: Vec<usize>,
    in_active: Vec<bool>,
}

impl Cycle {
    fn new(x0: &[f64]) -> Self {
        let n = x0.len();
        Self {
            x_bar: x0.to_vec(),
            d_bar: vec![0.0; n],
            theta: 0.0,
            phi: 1.0,
            z: vec![0.0; n],
            w: vec![0.0; n],
            active: Vec::new(),
            in_active: vec![false; n],
        }
    }

    fn x_into(&self, out: &mut [f64]) {
        out.copy_from_slice(&self.z);
        for ((o, &xb), &db) in out.iter_mut().zip(&self.x_bar).zip(&self.d_bar) {
            *o += xb + self.theta * db;
        }
    }

    /// Makes `(x_bar, d_bar)` the current explicit pair and resets the cache.
    fn close(&mut self) {
        let (theta, gap) = (self.theta, self.phi - self.theta);
        for j in 0..self.x_bar.len() {
            let db = self.d_bar[j];
            self.x_bar[j] += theta * db + self.z[j];
            self.d_bar[j] = gap * db + (self.w[j] - self.z[j]);
        }
        for &j in &self.active {
            self.z[j] = 0.0;
            self.w[j] = 0.0;
            self.in_active[j] = false;
        }
        self.active.clear();
        self.theta = 0.0;
        self.phi = 1.0;
    }
}

pub fn solve_sark(
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
    let period = resolve_cycle(a, config.cycle)?;
    let mut coefficients = CoefficientStream::new(m, lambda)?;
    let mut rec = Recorder::new(config, m, cost_of(a, SolverKind::Sark, Some(config.cycle)));

    let mut cyc = Cycle::new(x0);
    let mut scratch = vec![0.0; a.cols()];
    let mut done = rec.record(0, a, b, x0, None, observer);
    let mut k = 0;
    let mut t = 0;
    while k < budget && !done {
        let c = coefficients
            .next()
            .expect("coefficient stream is unbounded");
        let i = stream.next_index(m);
        let row = a.row(i);
        let (mut ax, mut ad) = (0.0, 0.0);
        row.for_each(|j, v| {
            ax += v * cyc.x_bar[j];
            ad += v * cyc.d_bar[j];
        });
        let s = (ax + cyc.phi * ad + row.dot(&cyc.w) - b[i]) / a.row_sq_norms()[i];

        let theta = cyc.theta;
        cyc.theta = cyc.phi;
        cyc.phi += c.p * (theta - cyc.phi);
        for &j in &cyc.active {
            let z_old = cyc.z[j];
            cyc.z[j] = cyc.w[j];
            cyc.w[j] += c.p * (z_old - cyc.w[j]);
        }
        let rs = c.r * s;
        row.for_each(|j, v| {
            if !cyc.in_active[j] {
                cyc.in_active[j] = true;
                cyc.active.push(j);
            }
            cyc.z[j] -= s * v;
            cyc.w[j] -= rs * v;
        });

        k += 1;
        t += 1;
        if rec.due(k, budget) {
            cyc.x_into(&mut scratch);
            let r = residual_norm_unchecked(a, &scratch, b);
            done = rec.push(k, r, &scratch, None, observer);
        }
        if t == period {
            cyc.close();
            t = 0;
        }
    }
    cyc.x_into(&mut scratch);
    Ok(Solution {
        x: scratch,
        trace: rec.finish(),
        iterations: k,
    })
}
