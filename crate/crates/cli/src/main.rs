//! `kaczmarz`: generate test systems, run the solvers, benchmark them over
//! many seeds and classify the cost regions.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a solver or
//! the oracle fails numerically.

mod args;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use kaczmarz_core::cost::{log_grid, write_regions_csv, write_regions_csv_file};
use kaczmarz_core::linalg::mmio;
use kaczmarz_core::{
    gen_dense_gaussian, gen_sparse_gaussian, gen_spectrum_controlled, run_benchmark, run_single,
    spectral_decompose, sweep_regions, AccelSchedule, BenchConfig, CycleLength, ExportFormat,
    LambdaChoice, ProblemInstance, SolverSpec, SpectralData, TraceTable,
};

use args::{
    output_format, parse_cycle, parse_format, parse_grid, parse_lambda, parse_seeds, parse_solver,
    SeedList, SolverArg,
};

#[derive(Debug, Parser)]
#[command(
    name = "kaczmarz",
    version,
    about = "Randomized Kaczmarz solvers and benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a consistent test system and write it to a directory.
    Generate {
        #[command(flatten)]
        gen: GenArgs,
        /// Output directory (A.mtx, b.mtx, x_star.mtx, meta.json).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one solver with one seed and write its trace.
    Solve {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, value_parser = parse_solver, default_value = "rk")]
        solver: SolverArg,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Trace output (CSV, or JSON by extension / --format).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = parse_format)]
        format: Option<ExportFormat>,
        /// Also write the final iterate as a Matrix Market vector.
        #[arg(long)]
        x_out: Option<PathBuf>,
    },
    /// Run several solvers over many seeds and write per-seed and mean traces.
    Bench {
        #[command(flatten)]
        source: SourceArgs,
        /// Repeatable; `kind` or `kind:lambda`.
        #[arg(long = "solver", value_parser = parse_solver, required = true)]
        solvers: Vec<SolverArg>,
        #[command(flatten)]
        run: RunArgs,
        /// Seed list: `7`, `1,4,9`, `1-20`.
        #[arg(long, value_parser = parse_seeds, default_value = "1-20")]
        seeds: SeedList,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse_format)]
        format: Option<ExportFormat>,
    },
    /// Classify a log-spaced (delta, lambda_min) grid by the cheapest method.
    Regions {
        /// `lo:hi:count`
        #[arg(long, value_parser = parse_grid, default_value = "1e-3:1:50")]
        deltas: (f64, f64, usize),
        /// `lo:hi:count`
        #[arg(long, value_parser = parse_grid, default_value = "1e-8:1:50")]
        lambdas: (f64, f64, usize),
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the acceleration schedule (gamma, alpha, beta, P, Q, R) as CSV.
    Schedule {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 20)]
        iters: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Generator {
    Dense,
    Sparse,
    Spectrum,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum, default_value = "dense")]
    generator: Generator,
    #[arg(long, default_value_t = 100)]
    m: usize,
    /// Column count (also the size of spectrum-controlled systems).
    #[arg(long, default_value_t = 50)]
    n: usize,
    /// Entry density for the sparse generator.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Singular-value decay for the spectrum-controlled generator.
    #[arg(long, default_value_t = 0.9)]
    alpha: f64,
    /// Seed of the instance (independent of the solver seeds).
    #[arg(long = "instance-seed", default_value_t = 0)]
    instance_seed: u64,
}

impl GenArgs {
    fn build(&self) -> Result<ProblemInstance> {
        Ok(match self.generator {
            Generator::Dense => gen_dense_gaussian(self.m, self.n, self.instance_seed)?,
            Generator::Sparse => {
                gen_sparse_gaussian(self.m, self.n, self.delta, self.instance_seed)?
            }
            Generator::Spectrum => gen_spectrum_controlled(self.n, self.alpha, self.instance_seed)?,
        })
    }
}

/// An instance directory, or generator flags.
#[derive(Debug, Args)]
struct SourceArgs {
    /// Directory written by `generate`.
    #[arg(long, conflicts_with_all = ["generator", "m", "n", "delta", "alpha", "instance_seed"])]
    instance: Option<PathBuf>,
    #[command(flatten)]
    gen: GenArgs,
    /// Compute the dense spectral oracle even if no solver needs it
    /// (enables envelopes and weighted errors).
    #[arg(long)]
    oracle: bool,
}

impl SourceArgs {
    fn load(&self) -> Result<ProblemInstance> {
        match &self.instance {
            Some(dir) => {
                ProblemInstance::read_dir(dir).with_context(|| format!("loading {}", dir.display()))
            }
            None => self.gen.build(),
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Lambda for accelerated solvers given without one: value, `min`, `0` or `auto`.
    #[arg(long, value_parser = parse_lambda, default_value = "0")]
    lambda: LambdaChoice,
    /// SARK cycle length: `auto` or an integer.
    #[arg(long, value_parser = parse_cycle, default_value = "auto")]
    cycle: CycleLength,
    #[arg(long, default_value_t = 10_000)]
    iters: usize,
    /// Iterations between residual checkpoints (default: m; 1 for CGNE).
    #[arg(long)]
    stride: Option<usize>,
    /// Stop once a checkpoint residual is at or below this value.
    #[arg(long)]
    target: Option<f64>,
}

impl RunArgs {
    fn config(&self) -> BenchConfig {
        BenchConfig {
            iterations: self.iters,
            residual_stride: self.stride,
            target_residual: self.target,
            ..BenchConfig::default()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e
                .chain()
                .find_map(|c| c.downcast_ref::<kaczmarz_core::Error>())
                .is_some_and(|c| c.is_numerical());
            ExitCode::from(if numerical { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { gen, out } => {
            let inst = gen.build()?;
            inst.write_dir(&out)?;
            eprintln!(
                "wrote {}x{} {} system (nnz {}) to {}",
                inst.a.rows(),
                inst.a.cols(),
                inst.meta.generator,
                inst.a.nnz(),
                out.display()
            );
            Ok(())
        }
        Command::Solve {
            source,
            solver,
            run,
            seed,
            out,
            format,
            x_out,
        } => {
            let inst = source.load()?;
            let spec = solver.resolve(run.lambda, run.cycle);
            let spectral = oracle_if_needed(&inst, &[spec], source.oracle)?;
            let result = run_single(&inst, spectral.as_ref(), &spec, seed, &run.config())?;
            for e in &result.events {
                eprintln!("{e}");
            }
            if let Some(last) = result.rows.last() {
                eprintln!(
                    "{}: k = {}, residual = {:e}, modeled ops = {:e}",
                    spec.label(),
                    last.k,
                    last.residual,
                    last.modeled_ops
                );
            }
            let table = TraceTable {
                rows: result.rows,
                events: result.events,
            };
            write_table(&table, out.as_deref(), format)?;
            if let Some(path) = x_out {
                mmio::write_vector(&result.x, &path)?;
            }
            Ok(())
        }
        Command::Bench {
            source,
            solvers,
            run,
            seeds,
            out,
            format,
        } => {
            let inst = source.load()?;
            let specs: Vec<SolverSpec> = solvers
                .iter()
                .map(|s| s.resolve(run.lambda, run.cycle))
                .collect();
            let spectral = oracle_if_needed(&inst, &specs, source.oracle)?;
            let table = run_benchmark(&inst, spectral.as_ref(), &specs, &seeds.0, &run.config())?;
            for e in &table.events {
                eprintln!("{e}");
            }
            for label in table.solvers() {
                if let Some(last) = table.mean(&label).last() {
                    eprintln!(
                        "{label}: mean residual {:e} at k = {} ({:e} modeled ops)",
                        last.residual, last.k, last.modeled_ops
                    );
                }
            }
            write_table(&table, Some(&out), format)
        }
        Command::Regions {
            deltas,
            lambdas,
            out,
        } => {
            let verdicts = sweep_regions(
                &log_grid(deltas.0, deltas.1, deltas.2),
                &log_grid(lambdas.0, lambdas.1, lambdas.2),
            );
            match out {
                Some(path) => write_regions_csv_file(&verdicts, &path)?,
                None => write_regions_csv(&verdicts, std::io::stdout().lock())?,
            }
            Ok(())
        }
        Command::Schedule {
            m,
            lambda,
            iters,
            out,
        } => {
            let s = AccelSchedule::build(m, lambda, iters)?;
            let mut text = String::from("k,gamma,alpha,beta,p,q,r\n");
            for k in 0..s.iterations() {
                let c = s.coefficients(k);
                text.push_str(&format!(
                    "{k},{},{},{},{},{},{}\n",
                    c.gamma, c.alpha, c.beta, c.p, c.q, c.r
                ));
            }
            match out {
                Some(path) => std::fs::write(&path, text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => std::io::stdout().lock().write_all(text.as_bytes())?,
            }
            Ok(())
        }
    }
}

/// The oracle is computed when requested or when a solver asks for `lambda = min`.
fn oracle_if_needed(
    inst: &ProblemInstance,
    specs: &[SolverSpec],
    requested: bool,
) -> Result<Option<SpectralData>> {
    let needed = specs
        .iter()
        .any(|s| s.kind.uses_lambda() && s.lambda == LambdaChoice::Min);
    if !(needed || requested) {
        return Ok(None);
    }
    match spectral_decompose(&inst.a) {
        Ok(s) => {
            eprintln!(
                "oracle: lambda_min = {:e}, lambda_max = {:e}, rank = {}",
                s.lambda_min, s.lambda_max, s.rank
            );
            Ok(Some(s))
        }
        Err(e) if needed => Err(e).context("lambda = min needs the dense oracle"),
        Err(e) => bail!("--oracle: {e}"),
    }
}

fn write_table(table: &TraceTable, out: Option<&Path>, format: Option<ExportFormat>) -> Result<()> {
    match out {
        Some(path) => table.export(path, output_format(path, format))?,
        None => match format.unwrap_or(ExportFormat::Csv) {
            ExportFormat::Csv => table.write_csv(std::io::stdout().lock())?,
            ExportFormat::Json => println!("{}", table.to_json()?),
        },
    }
    Ok(())
}
