//! The randomized Kaczmarz family and the CGNE baseline.
//!
//! All row-action solvers draw rows from an [`IndexStream`](crate::rng::IndexStream)
//! one index per iteration, so two solvers given equal seeds see the same row
//! sequence. `max_iterations = K` means exactly `K` row projections; the
//! returned point is `x_K`.
//!
//! Residuals are evaluated every `residual_stride` iterations (plus at `k = 0`
//! and at the last iteration). Those evaluations are not part of the modeled
//! operation count.

mod ark;
mod cgne;
pub(crate) mod rk;
mod sark;

pub use ark::{solve_ark_efficient, solve_ark_reference};
pub use cgne::solve_cgne;
pub use rk::solve_rk;
pub use sark::{resolve_cycle, solve_sark};

use serde::{Deserialize, Serialize};

use crate::cost::CostModel;
use crate::error::{Error, Result};
use crate::linalg::{residual_norm_unchecked, RowMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Rk,
    ArkReference,
    ArkEfficient,
    Sark,
    Cgne,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Rk => "rk",
            SolverKind::ArkReference => "ark-ref",
            SolverKind::ArkEfficient => "ark",
            SolverKind::Sark => "sark",
            SolverKind::Cgne => "cgne",
        }
    }

    pub fn uses_lambda(self) -> bool {
        matches!(
            self,
            SolverKind::ArkReference | SolverKind::ArkEfficient | SolverKind::Sark
        )
    }
}

impl std::str::FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "rk" => SolverKind::Rk,
            "ark" | "ark-efficient" => SolverKind::ArkEfficient,
            "ark-ref" | "ark-reference" => SolverKind::ArkReference,
            "sark" => SolverKind::Sark,
            "cgne" | "cg" => SolverKind::Cgne,
            other => return Err(format!("unknown solver '{other}'")),
        })
    }
}

/// SARK cycle length: fixed, or `round(2/sqrt(delta))` from the matrix density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum CycleLength {
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub cycle: CycleLength,
    /// Iterations between residual evaluations; `None` means `m` for the
    /// row-action solvers and 1 for CGNE.
    pub residual_stride: Option<usize>,
    /// Stop at the first evaluated residual at or below this value.
    pub target_residual: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            cycle: CycleLength::Auto,
            residual_stride: None,
            target_residual: None,
        }
    }
}

impl SolverConfig {
    pub fn with_iterations(max_iterations: usize) -> Self {
        Self {
            max_iterations,
            ..Self::default()
        }
    }

    pub fn stride(mut self, stride: usize) -> Self {
        self.residual_stride = Some(stride);
        self
    }

    pub fn target(mut self, target: f64) -> Self {
        self.target_residual = Some(target);
        self
    }

    pub fn cycle(mut self, cycle: CycleLength) -> Self {
        self.cycle = cycle;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub k: usize,
    pub modeled_ops: f64,
    pub residual: f64,
    pub error_sq: Option<f64>,
    pub weighted_error_sq: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub points: Vec<TracePoint>,
    /// Free-form notes about the run (e.g. fallbacks taken).
    pub events: Vec<String>,
}

impl Trace {
    pub fn last(&self) -> Option<&TracePoint> {
        self.points.last()
    }

    pub fn at(&self, k: usize) -> Option<&TracePoint> {
        self.points
            .binary_search_by_key(&k, |p| p.k)
            .ok()
            .map(|i| &self.points[i])
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub trace: Trace,
    /// Iterations actually performed (less than the budget on early exit).
    pub iterations: usize,
}

/// Extra per-checkpoint measurements supplied by an [`Observer`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Observation {
    pub error_sq: Option<f64>,
    pub weighted_error_sq: Option<f64>,
}

/// Hook called at every residual checkpoint with the current iterate.
///
/// `v` is the auxiliary sequence of the reference accelerated form and is
/// `None` for the other solvers.
pub trait Observer {
    fn observe(&mut self, _k: usize, _x: &[f64], _v: Option<&[f64]>) -> Observation {
        Observation::default()
    }
}

impl Observer for () {}

impl<F: FnMut(usize, &[f64], Option<&[f64]>) -> Observation> Observer for F {
    fn observe(&mut self, k: usize, x: &[f64], v: Option<&[f64]>) -> Observation {
        self(k, x, v)
    }
}

pub(crate) fn check_shapes(a: &RowMatrix, b: &[f64], x0: &[f64]) -> Result<()> {
    if b.len() != a.rows() || x0.len() != a.cols() {
        return Err(Error::ShapeMismatch(format!(
            "A is {}x{}, b has {}, x0 has {}",
            a.rows(),
            a.cols(),
            b.len(),
            x0.len()
        )));
    }
    Ok(())
}

/// Shared checkpoint bookkeeping.
pub(crate) struct Recorder {
    stride: usize,
    ops_per_iteration: f64,
    target: Option<f64>,
    trace: Trace,
}

impl Recorder {
    pub(crate) fn new(
        config: &SolverConfig,
        default_stride: usize,
        ops_per_iteration: f64,
    ) -> Self {
        Self {
            stride: config.residual_stride.unwrap_or(default_stride).max(1),
            ops_per_iteration,
            target: config.target_residual,
            trace: Trace::default(),
        }
    }

    #[inline]
    pub(crate) fn due(&self, k: usize, last: usize) -> bool {
        k % self.stride == 0 || k == last
    }

    /// Records a checkpoint from the residual norm; returns true when the target is met.
    pub(crate) fn push(
        &mut self,
        k: usize,
        residual: f64,
        x: &[f64],
        v: Option<&[f64]>,
        observer: &mut impl Observer,
    ) -> bool {
        let obs = observer.observe(k, x, v);
        self.trace.points.push(TracePoint {
            k,
            modeled_ops: k as f64 * self.ops_per_iteration,
            residual,
            error_sq: obs.error_sq,
            weighted_error_sq: obs.weighted_error_sq,
        });
        self.target.is_some_and(|t| residual <= t)
    }

    /// Evaluates `||Ax - b||` and records it.
    pub(crate) fn record(
        &mut self,
        k: usize,
        a: &RowMatrix,
        b: &[f64],
        x: &[f64],
        v: Option<&[f64]>,
        observer: &mut impl Observer,
    ) -> bool {
        let r = residual_norm_unchecked(a, x, b);
        self.push(k, r, x, v, observer)
    }

    pub(crate) fn last_k(&self) -> Option<usize> {
        self.trace.points.last().map(|p| p.k)
    }

    pub(crate) fn finish(self) -> Trace {
        self.trace
    }
}

pub(crate) fn cost_of(a: &RowMatrix, kind: SolverKind, cycle: Option<CycleLength>) -> f64 {
    CostModel::for_matrix(a).per_iteration(kind, cycle)
}
