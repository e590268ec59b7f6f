//! Fixed instances shared by the criterion benches, so timings from different
//! runs are taken on the same matrices.

use kaczmarz_core::{gen_dense_gaussian, gen_sparse_gaussian, spectral_decompose, ProblemInstance};

/// A generated system plus the smallest nonzero eigenvalue of `AᵀA`.
pub struct Fixture {
    pub name: String,
    pub instance: ProblemInstance,
    pub lambda_min: f64,
}

impl Fixture {
    fn with_oracle(name: String, instance: ProblemInstance) -> Self {
        let lambda_min = spectral_decompose(&instance.a)
            .expect("fixture oracle")
            .lambda_min;
        Self {
            name,
            instance,
            lambda_min,
        }
    }
}

/// Dense Gaussian `m x n`, instance seed 0.
pub fn dense(m: usize, n: usize) -> Fixture {
    let inst = gen_dense_gaussian(m, n, 0).expect("dense fixture");
    Fixture::with_oracle(format!("dense {m}x{n}"), inst)
}

/// Sparse Gaussian `m x n` at density `delta`, instance seed 0.
pub fn sparse(m: usize, n: usize, delta: f64) -> Fixture {
    let inst = gen_sparse_gaussian(m, n, delta, 0).expect("sparse fixture");
    Fixture::with_oracle(format!("sparse {m}x{n} delta={delta}"), inst)
}

/// The sparse densities where each accelerated variant is expected to pay off.
pub const DENSITIES: [f64; 3] = [0.8, 0.08, 0.01];
