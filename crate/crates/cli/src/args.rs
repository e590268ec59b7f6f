//! Value parsers for the option strings that clap cannot derive.

use std::path::Path;

use kaczmarz_core::{CycleLength, ExportFormat, LambdaChoice, SolverKind, SolverSpec};

/// `kind` or `kind:lambda` (for example `rk`, `ark:min`, `sark:auto`, `ark-ref:0.01`).
///
/// The lambda part is only meaningful for the accelerated solvers; when it is
/// absent the command-level `--lambda` applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverArg {
    pub kind: SolverKind,
    pub lambda: Option<LambdaChoice>,
}

impl SolverArg {
    pub fn resolve(self, default_lambda: LambdaChoice, cycle: CycleLength) -> SolverSpec {
        SolverSpec::new(self.kind)
            .lambda(self.lambda.unwrap_or(default_lambda))
            .cycle(cycle)
    }
}

pub fn parse_solver(s: &str) -> Result<SolverArg, String> {
    let (kind, lambda) = match s.split_once(':') {
        Some((k, l)) => (k, Some(l.parse::<LambdaChoice>()?)),
        None => (s, None),
    };
    let kind: SolverKind = kind.parse()?;
    if lambda.is_some() && !kind.uses_lambda() {
        return Err(format!("solver '{}' takes no lambda", kind.name()));
    }
    Ok(SolverArg { kind, lambda })
}

pub fn parse_lambda(s: &str) -> Result<LambdaChoice, String> {
    s.parse()
}

/// `auto` or a positive integer.
pub fn parse_cycle(s: &str) -> Result<CycleLength, String> {
    if s == "auto" {
        return Ok(CycleLength::Auto);
    }
    match s.parse::<usize>() {
        Ok(t) if t >= 1 => Ok(CycleLength::Fixed(t)),
        _ => Err(format!(
            "invalid cycle length '{s}' (expected 'auto' or an integer >= 1)"
        )),
    }
}

/// Sorted, deduplicated solver seeds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

/// Comma-separated seeds and inclusive ranges: `7`, `1,4,9`, `1-20`, `1-5,100`.
pub fn parse_seeds(s: &str) -> Result<SeedList, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || format!("invalid seed list entry '{part}'");
        match part.split_once('-') {
            Some((lo, hi)) => {
                let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
                let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
                if lo > hi {
                    return Err(bad());
                }
                out.extend(lo..=hi);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    if out.is_empty() {
        return Err("seed list is empty".into());
    }
    out.sort_unstable();
    out.dedup();
    Ok(SeedList(out))
}

/// `lo:hi:count`, a logarithmically spaced grid.
pub fn parse_grid(s: &str) -> Result<(f64, f64, usize), String> {
    let bad = || format!("invalid grid '{s}' (expected lo:hi:count with 0 < lo <= hi)");
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, count] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.parse().map_err(|_| bad())?;
    let hi: f64 = hi.parse().map_err(|_| bad())?;
    let count: usize = count.parse().map_err(|_| bad())?;
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) || count == 0 {
        return Err(bad());
    }
    Ok((lo, hi, count))
}

pub fn parse_format(s: &str) -> Result<ExportFormat, String> {
    s.parse()
}

/// Explicit format, else `.json` by extension, else CSV.
pub fn output_format(path: &Path, explicit: Option<ExportFormat>) -> ExportFormat {
    explicit.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("json") => ExportFormat::Json,
        _ => ExportFormat::Csv,
    })
}
