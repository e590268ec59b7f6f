//! Estimating the schedule parameter from the residual decay of a short RK
//! warm-up run, so the accelerated solvers can run without spectral data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::RowMatrix;
use crate::rng::{IndexStream, SplitMix64};
use crate::solvers::{
    check_shapes, cost_of, rk, Observer, Recorder, SolverConfig, SolverKind, Trace,
};

/// Smallest total budget accepted by [`estimate_lambda`].
pub const MIN_BUDGET: usize = 20;

/// Residuals at or below this cannot be used as the reference `r1`.
pub const RESIDUAL_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum ResidualMode {
    /// Exact `‖Ax − b‖`.
    #[default]
    Full,
    /// `‖Ax − b‖` estimated from a fixed random subset of `ceil(fraction m)`
    /// rows, rescaled by `m / |subset|`.
    Sampled { fraction: f64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate {
    pub lambda_hat: f64,
    pub k1: usize,
    pub k2: usize,
    pub residual_k1: f64,
    pub residual_k2: f64,
    /// `x_{k2}`, the iterate the accelerated run should start from.
    pub warm_start: Vec<f64>,
    /// Residual checkpoints of the warm-up, charged at the RK rate.
    pub trace: Trace,
}

/// `(k1, k2)` for a total budget: `k2 = ceil(K/10)`, `k1 = max(1, k2 − 10m)`.
pub fn warmup_window(budget: usize, m: usize) -> (usize, usize) {
    let k2 = budget.div_ceil(10);
    let k1 = k2.saturating_sub(10 * m).max(1);
    (k1, k2)
}

/// `m [1 − (r2/r1)^{0.5/(k2−k1)}]`, clamped to `[0, m]`.
///
/// A residual contracting like `(1 − λ/m)^{k/2}` gives `λ̂ ≈ m[1 − (1 − λ/m)^{1/4}]`,
/// a deliberate underestimate of `λ`.
pub fn lambda_from_residuals(m: usize, k1: usize, k2: usize, r1: f64, r2: f64) -> f64 {
    let m = m as f64;
    let exponent = 0.5 / (k2 - k1) as f64;
    let lambda = m * (1.0 - (r2 / r1).powf(exponent));
    if lambda.is_nan() {
        0.0
    } else {
        lambda.clamp(0.0, m)
    }
}

/// Runs `k2` RK iterations from `x0` on `stream` and estimates `λ` from the
/// residuals at `k1` and `k2`.
///
/// `residual_stride` controls only the warm-up trace (default `m`).
pub fn estimate_lambda(
    a: &RowMatrix,
    b: &[f64],
    x0: &[f64],
    budget: usize,
    stream: &mut IndexStream,
    mode: ResidualMode,
    residual_stride: Option<usize>,
    observer: &mut impl Observer,
) -> Result<LambdaEstimate> {
    check_shapes(a, b, x0)?;
    if budget < MIN_BUDGET {
        return Err(Error::InvalidBudget(budget, MIN_BUDGET));
    }
    let m = a.rows();
    let (k1, k2) = warmup_window(budget, m);
    let sampler = Sampler::new(m, mode);
    let config = SolverConfig {
        residual_stride,
        ..SolverConfig::with_iterations(k2)
    };
    let mut rec = Recorder::new(&config, m, cost_of(a, SolverKind::Rk, None));
    let mut x = x0.to_vec();
    rec.record(0, a, b, &x, None, observer);
    let mut r1 = f64::NAN;
    for k in 1..=k2 {
        rk::step(a, b, &mut x, stream);
        if k == k1 {
            r1 = sampler.residual(a, b, &x);
            if r1 <= RESIDUAL_FLOOR {
                return Err(Error::DegenerateResiduals(r1));
            }
        }
        if rec.due(k, k2) {
            rec.record(k, a, b, &x, None, observer);
        }
    }
    let r2 = sampler.residual(a, b, &x);
    Ok(LambdaEstimate {
        lambda_hat: lambda_from_residuals(m, k1, k2, r1, r2),
        k1,
        k2,
        residual_k1: r1,
        residual_k2: r2,
        warm_start: x,
        trace: rec.finish(),
    })
}

struct Sampler {
    rows: Option<Vec<usize>>,
    scale: f64,
}

impl Sampler {
    fn new(m: usize, mode: ResidualMode) -> Self {
        match mode {
            ResidualMode::Full => Self {
                rows: None,
                scale: 1.0,
            },
            ResidualMode::Sampled { fraction, seed } => {
                let count = ((fraction.clamp(0.0, 1.0) * m as f64).ceil() as usize).clamp(1, m);
                // partial Fisher-Yates: first `count` entries are a uniform subset
                let mut idx: Vec<usize> = (0..m).collect();
                let mut rng = SplitMix64::new(seed);
                for i in 0..count {
                    let j = i + rng.next_below((m - i) as u64) as usize;
                    idx.swap(i, j);
                }
                idx.truncate(count);
                idx.sort_unstable();
                Self {
                    rows: Some(idx),
                    scale: m as f64 / count as f64,
                }
            }
        }
    }

    fn residual(&self, a: &RowMatrix, b: &[f64], x: &[f64]) -> f64 {
        let sq: f64 = match &self.rows {
            None => (0..a.rows())
                .map(|i| (a.row(i).dot(x) - b[i]).powi(2))
                .sum(),
            Some(rows) => rows.iter().map(|&i| (a.row(i).dot(x) - b[i]).powi(2)).sum(),
        };
        (sq * self.scale).sqrt()
    }
}
