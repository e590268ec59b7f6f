//! Multi-seed benchmark runs and their trace tables.
//!
//! A run is one `(solver, seed)` pair started from `x0 = 0`. Runs fan out over
//! a rayon pool (size from `KACZMARZ_WORKERS`, else rayon's default) and are
//! collected in job order, so the table is a pure function of the inputs.
//!
//! Table rows are ordered by solver (input order), then seed (ascending, the
//! seed-mean series last), then `k`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lambda::{estimate_lambda, ResidualMode};
use crate::linalg::{dist_sq, format_f64};
use crate::oracle::{project_solution_set, BoundEnvelope, SpectralData};
use crate::problem::ProblemInstance;
use crate::rng::IndexStream;
use crate::solvers::{
    cost_of, solve_ark_efficient, solve_ark_reference, solve_cgne, solve_rk, solve_sark,
    CycleLength, Observation, Solution, SolverConfig, SolverKind, TracePoint,
};

/// Environment variable holding the worker-thread count.
pub const WORKERS_ENV: &str = "KACZMARZ_WORKERS";

/// Seed label of the seed-mean series.
pub const MEAN_SEED: &str = "mean";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LambdaChoice {
    Value(f64),
    /// `λ_min` from the oracle.
    Min,
    Zero,
    /// Estimated from an RK warm-up that consumes the first tenth of the budget.
    Auto,
}

impl fmt::Display for LambdaChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaChoice::Value(v) => write!(f, "{v}"),
            LambdaChoice::Min => f.write_str("min"),
            LambdaChoice::Zero => f.write_str("0"),
            LambdaChoice::Auto => f.write_str("auto"),
        }
    }
}

impl FromStr for LambdaChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "min" => Ok(LambdaChoice::Min),
            "auto" => Ok(LambdaChoice::Auto),
            "0" | "zero" => Ok(LambdaChoice::Zero),
            v => v
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite() && *x >= 0.0)
                .map(|x| {
                    if x == 0.0 {
                        LambdaChoice::Zero
                    } else {
                        LambdaChoice::Value(x)
                    }
                })
                .ok_or_else(|| {
                    format!("invalid lambda '{v}' (expected a value >= 0, 'min', '0' or 'auto')")
                }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSpec {
    pub kind: SolverKind,
    pub lambda: LambdaChoice,
    pub cycle: CycleLength,
}

impl SolverSpec {
    pub fn new(kind: SolverKind) -> Self {
        Self {
            kind,
            lambda: LambdaChoice::Zero,
            cycle: CycleLength::Auto,
        }
    }

    pub fn lambda(mut self, lambda: LambdaChoice) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn cycle(mut self, cycle: CycleLength) -> Self {
        self.cycle = cycle;
        self
    }

    /// `rk`, `cgne`, `ark(min)`, `sark(auto)`, `sark(0.01,T=5)`, ...
    pub fn label(&self) -> String {
        if !self.kind.uses_lambda() {
            return self.kind.name().to_string();
        }
        match (self.kind, self.cycle) {
            (SolverKind::Sark, CycleLength::Fixed(t)) => {
                format!("{}({},T={t})", self.kind.name(), self.lambda)
            }
            _ => format!("{}({})", self.kind.name(), self.lambda),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub iterations: usize,
    pub residual_stride: Option<usize>,
    pub target_residual: Option<f64>,
    /// Record `‖·‖²_{(AᵀA)⁺}` errors (needs spectral data; `O(rank·n)` per checkpoint).
    pub weighted_error: bool,
    pub residual_mode: ResidualMode,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            iterations: 10_000,
            residual_stride: None,
            target_residual: None,
            weighted_error: true,
            residual_mode: ResidualMode::Full,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub solver: String,
    pub seed: String,
    pub k: usize,
    pub modeled_ops: f64,
    pub residual: f64,
    pub error_sq: Option<f64>,
    /// Of `v_k` for the reference accelerated form, of `x_k` otherwise.
    pub weighted_error_sq: Option<f64>,
    /// Theory envelope at `k`, in the units of its kind: `error_sq` for the
    /// randomized solvers, squared residual for CGNE.
    pub envelope: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceTable {
    pub rows: Vec<TraceRow>,
    pub events: Vec<String>,
}

pub const CSV_HEADER: [&str; 8] = [
    "solver",
    "seed",
    "k",
    "modeled_ops",
    "residual",
    "error_sq",
    "weighted_error_sq",
    "envelope",
];

impl TraceTable {
    pub fn series<'a>(
        &'a self,
        solver: &'a str,
        seed: &'a str,
    ) -> impl Iterator<Item = &'a TraceRow> + 'a {
        self.rows
            .iter()
            .filter(move |r| r.solver == solver && r.seed == seed)
    }

    pub fn mean<'a>(&'a self, solver: &'a str) -> impl Iterator<Item = &'a TraceRow> + 'a {
        self.series(solver, MEAN_SEED)
    }

    /// Modeled operations at the first seed-mean checkpoint with residual `<= target`.
    pub fn ops_to_reach(&self, solver: &str, target: f64) -> Option<f64> {
        self.mean(solver)
            .find(|r| r.residual <= target)
            .map(|r| r.modeled_ops)
    }

    pub fn solvers(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for r in &self.rows {
            if out.last() != Some(&r.solver) && !out.contains(&r.solver) {
                out.push(r.solver.clone());
            }
        }
        out
    }

    /// Floats are written by [`format_f64`]; missing values are empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        let opt = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
        for r in &self.rows {
            w.write_record([
                r.solver.clone(),
                r.seed.clone(),
                r.k.to_string(),
                format_f64(r.modeled_ops),
                format_f64(r.residual),
                opt(r.error_sq),
                opt(r.weighted_error_sq),
                opt(r.envelope),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<trace csv>", e))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        for (i, rec) in rd.records().enumerate() {
            let rec = rec?;
            let line = i + 2;
            let field = |c: usize| {
                rec.get(c).ok_or_else(|| Error::Parse {
                    line,
                    reason: format!("missing column {c}"),
                })
            };
            let num = |c: usize| -> Result<f64> {
                field(c)?.parse().map_err(|e| Error::Parse {
                    line,
                    reason: format!("column {}: {e}", CSV_HEADER[c]),
                })
            };
            let opt = |c: usize| -> Result<Option<f64>> {
                if field(c)?.is_empty() {
                    Ok(None)
                } else {
                    num(c).map(Some)
                }
            };
            rows.push(TraceRow {
                solver: field(0)?.to_string(),
                seed: field(1)?.to_string(),
                k: field(2)?.parse().map_err(|e| Error::Parse {
                    line,
                    reason: format!("column k: {e}"),
                })?,
                modeled_ops: num(3)?,
                residual: num(4)?,
                error_sq: opt(5)?,
                weighted_error_sq: opt(6)?,
                envelope: opt(7)?,
            });
        }
        Ok(Self {
            rows,
            events: Vec::new(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn export(&self, path: &Path, format: ExportFormat) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        match format {
            ExportFormat::Csv => self.write_csv(&mut out)?,
            ExportFormat::Json => {
                let text = self.to_json()?;
                out.write_all(text.as_bytes())
                    .and_then(|_| out.write_all(b"\n"))
                    .map_err(|e| Error::io(path, e))?;
            }
        }
        out.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

/// Runs every solver in `solvers` once per seed and appends seed-mean series.
///
/// With `spectral` present the reference solution is `P_{A,b}(0)` (the
/// minimum-norm solution) and envelopes are attached; otherwise the planted
/// `x*` is used and envelopes are omitted.
pub fn run_benchmark(
    instance: &ProblemInstance,
    spectral: Option<&SpectralData>,
    solvers: &[SolverSpec],
    seeds: &[u64],
    config: &BenchConfig,
) -> Result<TraceTable> {
    if seeds.is_empty() {
        return Err(Error::ShapeMismatch(
            "benchmark needs at least one seed".into(),
        ));
    }
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();
    seeds.dedup();

    let ctx = Context::new(instance, spectral, config)?;

    let jobs: Vec<(usize, u64)> = (0..solvers.len())
        .flat_map(|s| seeds.iter().map(move |&seed| (s, seed)))
        .collect();
    let work = || -> Vec<Result<RunOutput>> {
        jobs.par_iter()
            .map(|&(s, seed)| {
                ctx.run(&solvers[s], seed).map_err(|e| Error::Run {
                    solver: solvers[s].label(),
                    seed,
                    source: Box::new(e),
                })
            })
            .collect()
    };
    let results = match worker_count() {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::NumericalFailure(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut table = TraceTable::default();
    let mut results = results.into_iter();
    for spec in solvers {
        let label = spec.label();
        let mut per_seed = Vec::with_capacity(seeds.len());
        for &seed in &seeds {
            let out = results.next().expect("one result per job")?;
            table.events.extend(
                out.events
                    .iter()
                    .map(|e| format!("{label} seed {seed}: {e}")),
            );
            table
                .rows
                .extend(out.points.iter().map(|p| row(&label, &seed.to_string(), p)));
            per_seed.push(out.points);
        }
        table.rows.extend(
            seed_mean(&per_seed)
                .iter()
                .map(|p| row(&label, MEAN_SEED, p)),
        );
    }
    Ok(table)
}

fn worker_count() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
}

/// A trace point plus the envelope value at that `k`.
#[derive(Debug, Clone, Copy)]
struct Point {
    tp: TracePoint,
    envelope: Option<f64>,
}

struct RunOutput {
    points: Vec<Point>,
    events: Vec<String>,
    x: Vec<f64>,
}

/// Result of [`run_single`].
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub rows: Vec<TraceRow>,
    pub events: Vec<String>,
    /// Final iterate.
    pub x: Vec<f64>,
}

/// One `(solver, seed)` run with the same reference, observer and envelope
/// rules as [`run_benchmark`], without the seed mean.
pub fn run_single(
    instance: &ProblemInstance,
    spectral: Option<&SpectralData>,
    spec: &SolverSpec,
    seed: u64,
    config: &BenchConfig,
) -> Result<SingleRun> {
    let ctx = Context::new(instance, spectral, config)?;
    let label = spec.label();
    let out = ctx.run(spec, seed).map_err(|e| Error::Run {
        solver: label.clone(),
        seed,
        source: Box::new(e),
    })?;
    Ok(SingleRun {
        rows: out
            .points
            .iter()
            .map(|p| row(&label, &seed.to_string(), p))
            .collect(),
        events: out.events,
        x: out.x,
    })
}

fn row(solver: &str, seed: &str, p: &Point) -> TraceRow {
    TraceRow {
        solver: solver.to_string(),
        seed: seed.to_string(),
        k: p.tp.k,
        modeled_ops: p.tp.modeled_ops,
        residual: p.tp.residual,
        error_sq: p.tp.error_sq,
        weighted_error_sq: p.tp.weighted_error_sq,
        envelope: p.envelope,
    }
}

/// Averages across seeds at every `k` any seed recorded. A seed that stopped
/// early contributes its final point to all later `k`.
fn seed_mean(per_seed: &[Vec<Point>]) -> Vec<Point> {
    let mut ks: Vec<usize> = per_seed.iter().flatten().map(|p| p.tp.k).collect();
    ks.sort_unstable();
    ks.dedup();
    let count = per_seed.len() as f64;
    let mut cursors = vec![0usize; per_seed.len()];
    let mut out = Vec::with_capacity(ks.len());
    for k in ks {
        let mut acc = Point {
            tp: TracePoint {
                k,
                modeled_ops: 0.0,
                residual: 0.0,
                error_sq: Some(0.0),
                weighted_error_sq: Some(0.0),
            },
            envelope: None,
        };
        let mut ops = f64::NAN;
        for (series, cur) in per_seed.iter().zip(cursors.iter_mut()) {
            while *cur + 1 < series.len() && series[*cur + 1].tp.k <= k {
                *cur += 1;
            }
            let p = &series[*cur];
            if p.tp.k == k {
                ops = p.tp.modeled_ops;
                acc.envelope = acc.envelope.or(p.envelope);
            }
            acc.tp.residual += p.tp.residual / count;
            acc.tp.error_sq = acc
                .tp
                .error_sq
                .zip(p.tp.error_sq)
                .map(|(a, e)| a + e / count);
            acc.tp.weighted_error_sq = acc
                .tp
                .weighted_error_sq
                .zip(p.tp.weighted_error_sq)
                .map(|(a, e)| a + e / count);
        }
        acc.tp.modeled_ops = ops;
        out.push(acc);
    }
    out
}

struct Context<'a> {
    instance: &'a ProblemInstance,
    spectral: Option<&'a SpectralData>,
    config: &'a BenchConfig,
    x0: Vec<f64>,
    reference: Vec<f64>,
}

impl<'a> Context<'a> {
    fn new(
        instance: &'a ProblemInstance,
        spectral: Option<&'a SpectralData>,
        config: &'a BenchConfig,
    ) -> Result<Self> {
        let x0 = vec![0.0; instance.a.cols()];
        let reference = match spectral {
            Some(s) => project_solution_set(&instance.a, &instance.b, &x0, s)?,
            None => instance.x_star.clone(),
        };
        Ok(Self {
            instance,
            spectral,
            config,
            x0,
            reference,
        })
    }

    fn run(&self, spec: &SolverSpec, seed: u64) -> Result<RunOutput> {
        let a = &self.instance.a;
        let b = &self.instance.b;
        let mut events = Vec::new();
        let mut stream = IndexStream::new(seed);
        let solver_config = SolverConfig {
            max_iterations: self.config.iterations,
            cycle: spec.cycle,
            residual_stride: self.config.residual_stride,
            target_residual: self.config.target_residual,
        };

        if spec.kind.uses_lambda() && spec.lambda == LambdaChoice::Auto {
            let est = estimate_lambda(
                a,
                b,
                &self.x0,
                self.config.iterations,
                &mut stream,
                self.config.residual_mode,
                self.config.residual_stride,
                &mut |_k: usize, x: &[f64], _v: Option<&[f64]>| self.observe(x, None),
            )?;
            events.push(format!(
                "lambda_hat = {} from residuals {} (k = {}) and {} (k = {})",
                est.lambda_hat, est.residual_k1, est.k1, est.residual_k2, est.k2
            ));
            if est.lambda_hat == 0.0 {
                events.push("lambda_hat is 0; continuing with lambda = 0".into());
            }
            let mut points: Vec<Point> = est
                .trace
                .points
                .iter()
                .map(|&tp| Point { tp, envelope: None })
                .collect();
            let warm_ops = est.k2 as f64 * cost_of(a, SolverKind::Rk, None);
            let reached = self
                .config
                .target_residual
                .is_some_and(|t| est.trace.last().is_some_and(|p| p.residual <= t));
            let remaining = self.config.iterations - est.k2;
            let mut x = est.warm_start.clone();
            if !reached && remaining > 0 {
                let cfg = SolverConfig {
                    max_iterations: remaining,
                    ..solver_config
                };
                let sol = self.dispatch(
                    spec.kind,
                    est.lambda_hat,
                    &est.warm_start,
                    &cfg,
                    &mut stream,
                )?;
                x = sol.x;
                for tp in sol.trace.points.into_iter().skip(1) {
                    points.push(Point {
                        tp: TracePoint {
                            k: tp.k + est.k2,
                            modeled_ops: tp.modeled_ops + warm_ops,
                            ..tp
                        },
                        envelope: None,
                    });
                }
            }
            return Ok(RunOutput { points, events, x });
        }

        let lambda = match (spec.kind.uses_lambda(), spec.lambda) {
            (false, _) | (true, LambdaChoice::Zero) => 0.0,
            (true, LambdaChoice::Value(v)) => v,
            (true, LambdaChoice::Min) => {
                self.spectral
                    .ok_or(Error::MissingSpectral(
                        "lambda = min needs the oracle spectrum",
                    ))?
                    .lambda_min
            }
            (true, LambdaChoice::Auto) => unreachable!(),
        };
        let sol = self.dispatch(spec.kind, lambda, &self.x0, &solver_config, &mut stream)?;
        let envelope = self.envelope(spec.kind, lambda);
        let points = sol
            .trace
            .points
            .into_iter()
            .map(|tp| Point {
                tp,
                envelope: envelope
                    .map(|e| e.at_iterate(tp.k))
                    .filter(|v| v.is_finite()),
            })
            .collect();
        Ok(RunOutput {
            points,
            events,
            x: sol.x,
        })
    }

    fn dispatch(
        &self,
        kind: SolverKind,
        lambda: f64,
        x0: &[f64],
        cfg: &SolverConfig,
        stream: &mut IndexStream,
    ) -> Result<Solution> {
        let a = &self.instance.a;
        let b = &self.instance.b;
        let mut obs = |_k: usize, x: &[f64], v: Option<&[f64]>| self.observe(x, v);
        match kind {
            SolverKind::Rk => solve_rk(a, b, x0, cfg, stream, &mut obs),
            SolverKind::ArkReference => {
                solve_ark_reference(a, b, lambda, x0, cfg, stream, &mut obs)
            }
            SolverKind::ArkEfficient => {
                solve_ark_efficient(a, b, lambda, x0, cfg, stream, &mut obs)
            }
            SolverKind::Sark => solve_sark(a, b, lambda, x0, cfg, stream, &mut obs),
            SolverKind::Cgne => solve_cgne(a, b, x0, cfg, &mut obs),
        }
    }

    fn observe(&self, x: &[f64], v: Option<&[f64]>) -> Observation {
        let weighted = match self.spectral {
            Some(s) if self.config.weighted_error => {
                let base = v.unwrap_or(x);
                let diff: Vec<f64> = base
                    .iter()
                    .zip(&self.reference)
                    .map(|(p, q)| p - q)
                    .collect();
                Some(s.weighted_norm_sq(&diff))
            }
            _ => None,
        };
        Observation {
            error_sq: Some(dist_sq(x, &self.reference)),
            weighted_error_sq: weighted,
        }
    }

    /// Envelope on `error_sq` (residual² for CGNE); only where the theorem applies.
    fn envelope(&self, kind: SolverKind, lambda: f64) -> Option<BoundEnvelope> {
        let s = self.spectral?;
        let m = self.instance.a.rows();
        match kind {
            SolverKind::Rk => Some(BoundEnvelope::rk(
                m,
                s.lambda_min,
                dist_sq(&self.x0, &self.reference),
            )),
            SolverKind::Cgne => {
                let r0 = crate::linalg::residual_norm_unchecked(
                    &self.instance.a,
                    &self.x0,
                    &self.instance.b,
                );
                Some(BoundEnvelope::cg(s.lambda_min, s.lambda_max, r0 * r0))
            }
            _ if lambda <= s.lambda_min => {
                let diff: Vec<f64> = self
                    .x0
                    .iter()
                    .zip(&self.reference)
                    .map(|(p, q)| p - q)
                    .collect();
                Some(BoundEnvelope::ark_x(m, lambda, s.weighted_norm_sq(&diff)))
            }
            _ => None,
        }
    }
}

/// Per-seed and mean series grouped by `(solver, seed)`, in table order.
pub fn group_rows(table: &TraceTable) -> BTreeMap<(String, String), Vec<&TraceRow>> {
    let mut out: BTreeMap<(String, String), Vec<&TraceRow>> = BTreeMap::new();
    for r in &table.rows {
        out.entry((r.solver.clone(), r.seed.clone()))
            .or_default()
            .push(r);
    }
    out
}
