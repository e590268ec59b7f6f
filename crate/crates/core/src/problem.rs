//! Seeded synthetic test problems. Every generator is a pure function of its
//! parameters and seed; all rows come out with unit norm and `b = A x*`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mmio, RowMatrix};
use crate::oracle::{spectral_decompose, svd_tall};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMeta {
    pub generator: String,
    /// Row count after any zero-row removal.
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requested_m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_max: Option<f64>,
}

impl InstanceMeta {
    fn new(generator: &str, m: usize, n: usize, seed: u64) -> Self {
        Self {
            generator: generator.to_string(),
            m,
            n,
            seed,
            requested_m: None,
            delta: None,
            alpha: None,
            lambda_min: None,
            lambda_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub a: RowMatrix,
    pub b: Vec<f64>,
    pub x_star: Vec<f64>,
    pub meta: InstanceMeta,
}

const MATRIX_FILE: &str = "A.mtx";
const RHS_FILE: &str = "b.mtx";
const SOLUTION_FILE: &str = "x_star.mtx";
const META_FILE: &str = "meta.json";

impl ProblemInstance {
    fn assemble(a: RowMatrix, x_star: Vec<f64>, meta: InstanceMeta) -> Self {
        let b = a.mul_vec(&x_star);
        Self { a, b, x_star, meta }
    }

    /// Writes `A.mtx`, `b.mtx`, `x_star.mtx` and `meta.json` into `dir`.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        mmio::write_matrix(&self.a, dir.join(MATRIX_FILE))?;
        mmio::write_vector(&self.b, dir.join(RHS_FILE))?;
        mmio::write_vector(&self.x_star, dir.join(SOLUTION_FILE))?;
        let meta = serde_json::to_string_pretty(&self.meta)?;
        let path = dir.join(META_FILE);
        fs::write(&path, meta + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let a = mmio::read_matrix(dir.join(MATRIX_FILE))?;
        let b = mmio::read_vector(dir.join(RHS_FILE))?;
        let x_star = mmio::read_vector(dir.join(SOLUTION_FILE))?;
        let path = dir.join(META_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(path, e))?;
        let meta = serde_json::from_str(&text)?;
        if b.len() != a.rows() || x_star.len() != a.cols() {
            return Err(Error::ShapeMismatch(format!(
                "instance in {}: A is {}x{}, b has {}, x_star has {}",
                dir.display(),
                a.rows(),
                a.cols(),
                b.len(),
                x_star.len()
            )));
        }
        Ok(Self { a, b, x_star, meta })
    }
}

/// I.i.d. `N(0,1)` entries, rows normalized, `x* ~ N(0, I)`.
pub fn gen_dense_gaussian(m: usize, n: usize, seed: u64) -> Result<ProblemInstance> {
    require(m >= 1 && n >= 1, "dense generator needs m, n >= 1")?;
    let mut rng = SplitMix64::new(seed);
    let mut data: Vec<f64> = (0..m * n).map(|_| rng.next_normal()).collect();
    for row in data.chunks_mut(n) {
        normalize(row);
    }
    let a = RowMatrix::from_dense(m, n, data)?;
    let x_star = normals(&mut rng, n);
    Ok(ProblemInstance::assemble(
        a,
        x_star,
        InstanceMeta::new("dense_gaussian", m, n, seed),
    ))
}

/// Each entry is kept with probability `delta` and drawn `N(0,1)`; rows that
/// end up empty are dropped, the rest normalized. `x*` is drawn after the drop.
pub fn gen_sparse_gaussian(m: usize, n: usize, delta: f64, seed: u64) -> Result<ProblemInstance> {
    require(m >= 1 && n >= 1, "sparse generator needs m, n >= 1")?;
    require(delta > 0.0 && delta <= 1.0, "delta must lie in (0, 1]")?;
    let mut rng = SplitMix64::new(seed);
    let mut indptr = vec![0];
    let mut indices = Vec::new();
    let mut values = Vec::new();
    for _ in 0..m {
        let start = values.len();
        for j in 0..n {
            if rng.next_f64() < delta {
                let v = rng.next_normal();
                if v != 0.0 {
                    indices.push(j);
                    values.push(v);
                }
            }
        }
        if values.len() > start {
            normalize(&mut values[start..]);
            indptr.push(values.len());
        }
    }
    let rows = indptr.len() - 1;
    if rows == 0 {
        return Err(Error::EmptyMatrix);
    }
    let a = RowMatrix::from_csr(rows, n, indptr, indices, values)?;
    let x_star = normals(&mut rng, n);
    let mut meta = InstanceMeta::new("sparse_gaussian", rows, n, seed);
    meta.requested_m = Some(m);
    meta.delta = Some(delta);
    Ok(ProblemInstance::assemble(a, x_star, meta))
}

/// `A = U diag(i^-alpha) Vᵀ` from the SVD of an `n x n` Gaussian matrix,
/// then rows normalized. The meta records the spectrum of the final `AᵀA`.
pub fn gen_spectrum_controlled(n: usize, alpha: f64, seed: u64) -> Result<ProblemInstance> {
    require(n >= 2, "spectrum-controlled generator needs n >= 2")?;
    require(alpha > 0.0 && alpha.is_finite(), "alpha must be positive")?;
    let mut rng = SplitMix64::new(seed);
    let g: Vec<f64> = (0..n * n).map(|_| rng.next_normal()).collect();
    let svd = svd_tall(&g, n, n)?;
    let scales: Vec<f64> = (1..=n).map(|i| (i as f64).powf(-alpha)).collect();
    let mut data = recombine(&svd.u, &scales, &svd.v, n);
    for row in data.chunks_mut(n) {
        normalize(row);
    }
    let a = RowMatrix::from_dense(n, n, data)?;
    let spectral = spectral_decompose(&a)?;
    let x_star = normals(&mut rng, n);
    let mut meta = InstanceMeta::new("spectrum_controlled", n, n, seed);
    meta.alpha = Some(alpha);
    meta.lambda_min = Some(spectral.lambda_min);
    meta.lambda_max = Some(spectral.lambda_max);
    Ok(ProblemInstance::assemble(a, x_star, meta))
}

/// Random `n x n` orthogonal matrix `U Vᵀ` from the SVD of a Gaussian matrix.
pub fn random_orthogonal(n: usize, seed: u64) -> Result<RowMatrix> {
    require(n >= 1, "orthogonal generator needs n >= 1")?;
    let mut rng = SplitMix64::new(seed);
    let g: Vec<f64> = (0..n * n).map(|_| rng.next_normal()).collect();
    let svd = svd_tall(&g, n, n)?;
    RowMatrix::from_dense(n, n, recombine(&svd.u, &vec![1.0; n], &svd.v, n))
}

/// Row-major `U diag(s) Vᵀ` from column-major square factors.
fn recombine(u: &[f64], s: &[f64], v: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for (k, &sk) in s.iter().enumerate() {
        let uk = &u[k * n..(k + 1) * n];
        let vk = &v[k * n..(k + 1) * n];
        for (i, &ui) in uk.iter().enumerate() {
            let f = ui * sk;
            for (o, &vj) in out[i * n..(i + 1) * n].iter_mut().zip(vk) {
                *o += f * vj;
            }
        }
    }
    out
}

fn normalize(row: &mut [f64]) {
    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 && norm != 1.0 {
        row.iter_mut().for_each(|v| *v /= norm);
    }
}

fn normals(rng: &mut SplitMix64, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.next_normal()).collect()
}

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidMatrix(what.to_string()))
    }
}
