//! Randomized Kaczmarz solvers, their accelerated variants, and the tooling
//! used to benchmark them against each other and against theory.

pub mod cost;
pub mod error;
pub mod harness;
pub mod lambda;
pub mod linalg;
pub mod oracle;
pub mod problem;
pub mod rng;
pub mod schedule;
pub mod solvers;

pub use cost::{classify_region, modeled_ops, sweep_regions, CostModel, Method, RegionVerdict};
pub use error::{Error, Result};
pub use harness::{
    run_benchmark, run_single, BenchConfig, ExportFormat, LambdaChoice, SingleRun, SolverSpec,
    TraceRow, TraceTable,
};
pub use lambda::{estimate_lambda, LambdaEstimate, ResidualMode};
pub use linalg::{DensityReport, Row, RowMatrix};
pub use oracle::{
    bound_envelope, check_lemma1, check_lemma2, project_solution_set, spectral_decompose,
    weighted_norm_sq, BoundEnvelope, BoundKind, SpectralData,
};
pub use problem::{
    gen_dense_gaussian, gen_sparse_gaussian, gen_spectrum_controlled, InstanceMeta, ProblemInstance,
};
pub use rng::{IndexStream, SplitMix64};
pub use schedule::{AccelSchedule, CoefficientStream, Coefficients, GammaRecurrence};
pub use solvers::{
    resolve_cycle, solve_ark_efficient, solve_ark_reference, solve_cgne, solve_rk, solve_sark,
    CycleLength, Observation, Observer, Solution, SolverConfig, SolverKind, Trace, TracePoint,
};
