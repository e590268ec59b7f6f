//! Modeled per-iteration operation counts and the (delta, lambda_min) region rule.
//!
//! Counts are analytic, not measured. They are what the benchmark traces use
//! on their operations axis.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{format_f64, RowMatrix};
use crate::solvers::{CycleLength, SolverKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub m: usize,
    pub n: usize,
    pub delta: f64,
}

impl CostModel {
    pub fn new(m: usize, n: usize, delta: f64) -> Self {
        Self { m, n, delta }
    }

    pub fn for_matrix(a: &RowMatrix) -> Self {
        Self::new(a.rows(), a.cols(), a.delta())
    }

    /// Modeled operations for one iteration of `kind`. `cycle` only matters
    /// for SARK; `None` and `Auto` both mean the optimal cycle length.
    pub fn per_iteration(&self, kind: SolverKind, cycle: Option<CycleLength>) -> f64 {
        modeled_ops(kind, self.m, self.n, self.delta, cycle)
    }
}

/// Modeled operations per iteration.
///
/// | solver  | ops                                 |
/// |---------|-------------------------------------|
/// | rk      | `4 δ n`                             |
/// | ark     | `3n + 6 δ n`                        |
/// | ark-ref | `6n + 5 δ n`                        |
/// | sark    | `6 √δ n + 10.5 δ n` at `T = 2/√δ`   |
/// | sark, T | `1.5 (T-1) δ n + 6n/T + 12 δ n`     |
/// | cgne    | `4 δ m n`                           |
pub fn modeled_ops(
    kind: SolverKind,
    m: usize,
    n: usize,
    delta: f64,
    cycle: Option<CycleLength>,
) -> f64 {
    let n = n as f64;
    match kind {
        SolverKind::Rk => 4.0 * delta * n,
        SolverKind::ArkEfficient => 3.0 * n + 6.0 * delta * n,
        SolverKind::ArkReference => 6.0 * n + 5.0 * delta * n,
        SolverKind::Sark => match cycle {
            Some(CycleLength::Fixed(t)) => sark_ops(n, delta, t as f64),
            _ => 6.0 * delta.sqrt() * n + 10.5 * delta * n,
        },
        SolverKind::Cgne => 4.0 * delta * m as f64 * n,
    }
}

/// Average SARK cost per iteration for a real-valued cycle length `t`.
pub fn sark_ops(n: f64, delta: f64, t: f64) -> f64 {
    1.5 * (t - 1.0) * delta * n + 6.0 * n / t + 12.0 * delta * n
}

/// Cycle length minimizing [`sark_ops`].
pub fn optimal_cycle(delta: f64) -> f64 {
    2.0 / delta.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Method {
    Rk,
    Ark,
    Sark,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rk => "RK",
            Method::Ark => "ARK",
            Method::Sark => "SARK",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "RK" => Ok(Method::Rk),
            "ARK" => Ok(Method::Ark),
            "SARK" => Ok(Method::Sark),
            other => Err(format!("unknown method '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionVerdict {
    pub delta: f64,
    pub lambda_min: f64,
    pub best: Method,
}

/// `(4δ/(3+6δ))²`: below this ARK beats RK per operation.
pub fn ark_threshold(delta: f64) -> f64 {
    (4.0 * delta / (3.0 + 6.0 * delta)).powi(2)
}

/// `(4√δ/(6+10.5√δ))²`: below this SARK beats RK per operation.
pub fn sark_threshold(delta: f64) -> f64 {
    let r = delta.sqrt();
    (4.0 * r / (6.0 + 10.5 * r)).powi(2)
}

pub fn classify_region(delta: f64, lambda_min: f64) -> RegionVerdict {
    let sark = sark_threshold(delta);
    let best = if lambda_min >= ark_threshold(delta).max(sark) {
        Method::Rk
    } else if lambda_min <= sark && delta <= 0.1 {
        Method::Sark
    } else {
        Method::Ark
    };
    RegionVerdict {
        delta,
        lambda_min,
        best,
    }
}

/// Verdicts for every grid cell, delta-major.
pub fn sweep_regions(deltas: &[f64], lambdas: &[f64]) -> Vec<RegionVerdict> {
    deltas
        .iter()
        .flat_map(|&d| lambdas.iter().map(move |&l| classify_region(d, l)))
        .collect()
}

/// `count` points spaced evenly in log10 between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            let step = (b - a) / (count - 1) as f64;
            (0..count)
                .map(|i| {
                    if i + 1 == count {
                        hi
                    } else {
                        10f64.powf(a + step * i as f64)
                    }
                })
                .collect()
        }
    }
}

/// CSV with header `delta,lambda_min,best`. Floats use the shortest
/// representation that parses back to the same value.
pub fn write_regions_csv<W: Write>(verdicts: &[RegionVerdict], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["delta", "lambda_min", "best"])?;
    for v in verdicts {
        w.write_record([
            format_f64(v.delta),
            format_f64(v.lambda_min),
            v.best.as_str().to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<regions csv>", e))?;
    Ok(())
}

pub fn write_regions_csv_file(verdicts: &[RegionVerdict], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_regions_csv(verdicts, std::io::BufWriter::new(f))
}

pub fn read_regions_csv<R: std::io::Read>(input: R) -> Result<Vec<RegionVerdict>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let bad = |reason: String| Error::Parse {
            line: line + 2,
            reason,
        };
        let num = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| bad(format!("missing column {i}")))?
                .parse::<f64>()
                .map_err(|e| bad(e.to_string()))
        };
        let best = rec
            .get(2)
            .ok_or_else(|| bad("missing column 2".into()))?
            .parse::<Method>()
            .map_err(bad)?;
        out.push(RegionVerdict {
            delta: num(0)?,
            lambda_min: num(1)?,
            best,
        });
    }
    Ok(out)
}
