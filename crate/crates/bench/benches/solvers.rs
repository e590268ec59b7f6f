//! Wall-clock cost of a fixed number of iterations per solver. The modeled
//! operation counts live in the cost module; these numbers say whether the
//! implementations track them.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use kaczmarz_bench::{dense, sparse, Fixture, DENSITIES};
use kaczmarz_core::{
    solve_ark_efficient, solve_ark_reference, solve_cgne, solve_rk, solve_sark, CycleLength,
    IndexStream, SolverConfig,
};

const ITERATIONS: usize = 2000;

fn kaczmarz_family(c: &mut Criterion, fx: &Fixture) {
    let (a, b) = (&fx.instance.a, &fx.instance.b);
    let x0 = vec![0.0; a.cols()];
    // stride past the budget: only the endpoints pay for a residual
    let config = SolverConfig::with_iterations(ITERATIONS).stride(ITERATIONS);
    let mut group = c.benchmark_group(&fx.name);
    group.throughput(Throughput::Elements(ITERATIONS as u64));
    group.bench_function("rk", |bench| {
        bench.iter(|| solve_rk(a, b, &x0, &config, &mut IndexStream::new(1), &mut ()).unwrap())
    });
    group.bench_function("ark", |bench| {
        bench.iter(|| {
            solve_ark_efficient(
                a,
                b,
                fx.lambda_min,
                &x0,
                &config,
                &mut IndexStream::new(1),
                &mut (),
            )
            .unwrap()
        })
    });
    group.bench_function("ark-ref", |bench| {
        bench.iter(|| {
            solve_ark_reference(
                a,
                b,
                fx.lambda_min,
                &x0,
                &config,
                &mut IndexStream::new(1),
                &mut (),
            )
            .unwrap()
        })
    });
    for cycle in [CycleLength::Fixed(1), CycleLength::Auto] {
        let cfg = config.clone().cycle(cycle);
        group.bench_with_input(
            BenchmarkId::new("sark", format!("{cycle:?}")),
            &cfg,
            |bench, cfg| {
                bench.iter(|| {
                    solve_sark(
                        a,
                        b,
                        fx.lambda_min,
                        &x0,
                        cfg,
                        &mut IndexStream::new(1),
                        &mut (),
                    )
                    .unwrap()
                })
            },
        );
    }
    group.finish();
}

fn sparse_solvers(c: &mut Criterion) {
    for delta in DENSITIES {
        kaczmarz_family(c, &sparse(1000, 950, delta));
    }
}

fn dense_solvers(c: &mut Criterion) {
    kaczmarz_family(c, &dense(1000, 800));
}

fn cgne(c: &mut Criterion) {
    let fx = sparse(1000, 950, 0.08);
    let x0 = vec![0.0; 950];
    let config = SolverConfig::with_iterations(100).stride(100);
    c.bench_function("cgne 100 its sparse 1000x950 delta=0.08", |bench| {
        bench.iter(|| solve_cgne(&fx.instance.a, &fx.instance.b, &x0, &config, &mut ()).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = sparse_solvers, dense_solvers, cgne
}
criterion_main!(benches);
