#![allow(dead_code)]

use kaczmarz_core::problem::random_orthogonal;
use kaczmarz_core::{
    gen_dense_gaussian, gen_sparse_gaussian, ProblemInstance, RowMatrix, SplitMix64,
};

/// Twenty consistent systems up to 100x100: dense and sparse, tall, square
/// and wide (rank-deficient when wide).
pub fn corpus() -> Vec<ProblemInstance> {
    let shapes = [(100, 100), (100, 50), (50, 100), (80, 80), (30, 10)];
    let mut out = Vec::new();
    for (i, &(m, n)) in shapes.iter().enumerate() {
        let s = i as u64;
        out.push(gen_dense_gaussian(m, n, 100 + s).unwrap());
        out.push(gen_dense_gaussian(m, n, 200 + s).unwrap());
        out.push(gen_sparse_gaussian(m, n, 0.1, 300 + s).unwrap());
        out.push(gen_sparse_gaussian(m, n, 0.3, 400 + s).unwrap());
    }
    out
}

pub fn gaussian(rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.next_normal()).collect()
}

/// Points near and far from the solution set: `x* + s g` over several scales.
pub fn states(inst: &ProblemInstance, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = SplitMix64::new(seed);
    let n = inst.a.cols();
    (0..count)
        .map(|i| {
            let scale = 10f64.powi((i % 7) as i32 - 3);
            let g = gaussian(&mut rng, n);
            inst.x_star
                .iter()
                .zip(g)
                .map(|(x, d)| x + scale * d)
                .collect()
        })
        .collect()
}

pub fn orthogonal(n: usize, seed: u64) -> RowMatrix {
    random_orthogonal(n, seed).unwrap()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn max_rel_diff(x: &[f64], y: &[f64]) -> f64 {
    let scale = x.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale
}
