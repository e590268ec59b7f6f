//! Scalar sequences driving the accelerated iteration.
//!
//! `gamma_k` is the larger root of
//! `gamma^2 - gamma/m = (1 - gamma*lambda/m) * gamma_{k-1}^2` with `gamma_{-1} = 0`;
//! from it
//!
//! ```text
//! alpha_k = (m - gamma_k lambda) / (gamma_k (m^2 - lambda))
//! beta_k  = 1 - gamma_k lambda / m
//! P_k = alpha_{k+1} (1 - m gamma_k)
//! Q_k = 1 - alpha_{k+1} + m alpha_{k+1} gamma_k
//! R_k = 1 - alpha_{k+1} + alpha_{k+1} gamma_k
//! ```
//!
//! For `0 <= lambda <= m` the roots satisfy `gamma_{k-1} <= gamma_k <= 1/sqrt(lambda)`;
//! the computed root is clamped into that bracket so rounding cannot break
//! monotonicity once the sequence has converged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Checks `0 <= lambda <= m`.
pub fn validate_lambda(m: usize, lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda <= m as f64) {
        return Err(Error::InvalidLambda {
            lambda,
            max: m as f64,
        });
    }
    Ok(())
}

/// One step of the schedule recurrence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub gamma_prev: f64,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Unbounded generator of [`Step`]s for `k = 0, 1, 2, ...`.
#[derive(Debug, Clone)]
pub struct GammaRecurrence {
    m: f64,
    lambda: f64,
    gamma_cap: f64,
    prev: f64,
}

impl GammaRecurrence {
    pub fn new(m: usize, lambda: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::ShapeMismatch("schedule needs m >= 1".into()));
        }
        validate_lambda(m, lambda)?;
        Ok(Self {
            m: m as f64,
            lambda,
            gamma_cap: if lambda > 0.0 {
                1.0 / lambda.sqrt()
            } else {
                f64::INFINITY
            },
            prev: 0.0,
        })
    }
}

impl Iterator for GammaRecurrence {
    type Item = Step;

    fn next(&mut self) -> Option<Step> {
        let (m, lambda, g_prev) = (self.m, self.lambda, self.prev);
        let c = (1.0 - lambda * g_prev * g_prev) / m;
        let root = 0.5 * (c + (c * c + 4.0 * g_prev * g_prev).sqrt());
        let gamma = root.max(g_prev).min(self.gamma_cap);

        let denom = m * m - lambda;
        let alpha = if g_prev == 0.0 {
            1.0
        } else if denom > 1e-8 * m * m {
            (m - gamma * lambda) / (gamma * denom)
        } else {
            // m = 1, lambda = 1: the ratio above is 0/0; use the equivalent
            // form (1 - alpha)/alpha = m gamma_{k-1}^2 / gamma_k.
            gamma / (gamma + m * g_prev * g_prev)
        };
        let beta = 1.0 - gamma * lambda / m;
        self.prev = gamma;
        Some(Step {
            gamma_prev: g_prev,
            gamma,
            alpha,
            beta,
        })
    }
}

/// Combination coefficients used by the efficient and sparse solvers at iteration `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

/// Streams [`Coefficients`] for `k = 0, 1, ...` without a fixed budget.
#[derive(Debug, Clone)]
pub struct CoefficientStream {
    m: f64,
    steps: GammaRecurrence,
    current: Step,
}

impl CoefficientStream {
    pub fn new(m: usize, lambda: f64) -> Result<Self> {
        let mut steps = GammaRecurrence::new(m, lambda)?;
        let current = steps.next().expect("unbounded");
        Ok(Self {
            m: m as f64,
            steps,
            current,
        })
    }
}

impl Iterator for CoefficientStream {
    type Item = Coefficients;

    fn next(&mut self) -> Option<Coefficients> {
        let next = self.steps.next().expect("unbounded");
        let cur = std::mem::replace(&mut self.current, next);
        Some(combine(self.m, &cur, next.alpha))
    }
}

fn combine(m: f64, step: &Step, alpha_next: f64) -> Coefficients {
    let g = step.gamma;
    Coefficients {
        gamma: g,
        alpha: step.alpha,
        beta: step.beta,
        p: alpha_next * (1.0 - m * g),
        q: 1.0 - alpha_next + m * alpha_next * g,
        r: 1.0 - alpha_next + alpha_next * g,
    }
}

/// Precomputed schedule for a fixed number of iterations `K`.
///
/// `gamma` holds `gamma_{-1} .. gamma_K` (index 0 is `gamma_{-1} = 0`);
/// `alpha`/`beta` hold `k = 0..=K`; `p`/`q`/`r` hold one entry per iteration
/// `k = 0..K` (each needs `alpha_{k+1}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccelSchedule {
    pub m: usize,
    pub lambda: f64,
    pub gamma: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
}

impl AccelSchedule {
    pub fn build(m: usize, lambda: f64, iterations: usize) -> Result<Self> {
        let steps: Vec<Step> = GammaRecurrence::new(m, lambda)?
            .take(iterations + 1)
            .collect();
        let mf = m as f64;
        let mut gamma = Vec::with_capacity(iterations + 2);
        gamma.push(0.0);
        gamma.extend(steps.iter().map(|s| s.gamma));
        let alpha: Vec<f64> = steps.iter().map(|s| s.alpha).collect();
        let beta = steps.iter().map(|s| s.beta).collect();
        let (mut p, mut q, mut r) = (
            Vec::with_capacity(iterations),
            Vec::with_capacity(iterations),
            Vec::with_capacity(iterations),
        );
        for k in 0..iterations {
            let c = combine(mf, &steps[k], alpha[k + 1]);
            p.push(c.p);
            q.push(c.q);
            r.push(c.r);
        }
        Ok(Self {
            m,
            lambda,
            gamma,
            alpha,
            beta,
            p,
            q,
            r,
        })
    }

    /// Number of iterations the schedule covers.
    pub fn iterations(&self) -> usize {
        self.p.len()
    }

    /// `gamma_k` for `k >= 0`.
    #[inline]
    pub fn gamma(&self, k: usize) -> f64 {
        self.gamma[k + 1]
    }

    /// `gamma_{k-1}`
    #[inline]
    pub fn gamma_prev(&self, k: usize) -> f64 {
        self.gamma[k]
    }

    #[inline]
    pub fn coefficients(&self, k: usize) -> Coefficients {
        Coefficients {
            gamma: self.gamma(k),
            alpha: self.alpha[k],
            beta: self.beta[k],
            p: self.p[k],
            q: self.q[k],
            r: self.r[k],
        }
    }
}

/// `sigma_1 = 1 + sqrt(lambda)/(2m)`, `sigma_2 = 1 - sqrt(lambda)/(2m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateConstants {
    pub sigma1: f64,
    pub sigma2: f64,
}

impl RateConstants {
    pub fn new(m: usize, lambda: f64) -> Self {
        let h = lambda.max(0.0).sqrt() / (2.0 * m as f64);
        Self {
            sigma1: 1.0 + h,
            sigma2: 1.0 - h,
        }
    }

    /// Asymptotic per-iteration decrease factor `sigma_1^{-2}` (about `1 - sqrt(lambda)/m`).
    pub fn decrease_factor(&self) -> f64 {
        self.sigma1.powi(-2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn first_step_is_forced() {
        for &(m, lambda) in &[
            (1usize, 0.0),
            (1, 1.0),
            (10, 0.5),
            (100, 0.0),
            (1000, 1000.0),
        ] {
            let s = AccelSchedule::build(m, lambda, 3).unwrap();
            let mf = m as f64;
            assert_eq!(s.gamma_prev(0), 0.0);
            assert!((s.gamma(0) - 1.0 / mf).abs() <= 1e-15 / mf);
            assert!((s.alpha[0] - 1.0).abs() < 1e-14, "m={m} lambda={lambda}");
            assert!((s.beta[0] - (1.0 - lambda / (mf * mf))).abs() < 1e-14);
        }
    }

    #[test]
    fn invalid_lambda() {
        assert!(matches!(
            AccelSchedule::build(10, -1e-9, 5),
            Err(Error::InvalidLambda { .. })
        ));
        assert!(matches!(
            AccelSchedule::build(10, 10.5, 5),
            Err(Error::InvalidLambda { .. })
        ));
        assert!(AccelSchedule::build(10, f64::NAN, 5).is_err());
        assert!(AccelSchedule::build(10, 10.0, 5).is_ok());
    }

    #[test]
    fn zero_lambda_keeps_beta_one() {
        let s = AccelSchedule::build(50, 0.0, 500).unwrap();
        assert!(s.beta.iter().all(|&b| b == 1.0));
    }

    #[test]
    fn gamma_tends_to_inverse_sqrt_lambda() {
        for &(m, lambda) in &[(10usize, 0.01f64), (100, 0.5), (2, 2.0)] {
            let k = (50.0 * m as f64 / lambda.sqrt()).ceil() as usize;
            let s = AccelSchedule::build(m, lambda, k).unwrap();
            assert!(s.gamma(k) >= 0.99 / lambda.sqrt());
        }
    }

    #[test]
    fn stream_matches_precomputed() {
        let s = AccelSchedule::build(7, 0.3, 40).unwrap();
        let streamed: Vec<Coefficients> =
            CoefficientStream::new(7, 0.3).unwrap().take(40).collect();
        for (k, c) in streamed.iter().enumerate() {
            assert_eq!(*c, s.coefficients(k));
        }
    }

    #[test]
    fn rate_constants() {
        let r = RateConstants::new(100, 0.0);
        assert_eq!((r.sigma1, r.sigma2), (1.0, 1.0));
        let r = RateConstants::new(100, 0.01);
        assert!((r.sigma1 - 1.0005).abs() < 1e-15);
        assert!((r.sigma2 - 0.9995).abs() < 1e-15);
        let r = RateConstants::new(1000, 0.0006);
        assert!((r.decrease_factor() - (1.0 - 0.0006f64.sqrt() / 1000.0)).abs() < 1e-6);
    }

    #[test]
    fn degenerate_m1_lambda1() {
        let s = AccelSchedule::build(1, 1.0, 10).unwrap();
        assert!(s.gamma[1..].iter().all(|&g| g == 1.0));
        assert_eq!(s.alpha[0], 1.0);
        assert!(s.alpha[1..].iter().all(|&a| (a - 0.5).abs() < 1e-15));
    }

    fn lambda_strategy() -> impl Strategy<Value = (usize, f64)> {
        prop::sample::select(vec![1usize, 2, 10, 100, 1000]).prop_flat_map(|m| {
            let mf = m as f64;
            (
                Just(m),
                prop_oneof![Just(0.0), 1e-8..1e-2f64, Just(mf), 0.0..=mf],
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn schedule_invariants((m, lambda) in lambda_strategy(), iters in 1usize..2000) {
            let s = AccelSchedule::build(m, lambda, iters).unwrap();
            let mf = m as f64;
            let cap = if lambda > 0.0 { 1.0 / lambda.sqrt() } else { f64::INFINITY };
            for k in 0..=iters {
                let (g, gp) = (s.gamma(k), s.gamma_prev(k));
                prop_assert!(g >= gp);
                prop_assert!(g >= 1.0 / mf * (1.0 - 1e-15));
                prop_assert!(g <= cap * (1.0 + 1e-15));
                prop_assert!((0.0..=1.0).contains(&s.alpha[k]));
                prop_assert!((0.0..=1.0).contains(&s.beta[k]));
                let scale = g * g;
                let rec = g * g - g / mf - (1.0 - g * lambda / mf) * gp * gp;
                prop_assert!(rec.abs() <= 1e-12 * scale, "recurrence residual {rec} at k={k}");
                let r20 = g * g - g / mf - s.beta[k] * gp * gp;
                prop_assert!(r20.abs() <= 1e-12 * scale);
                let lhs = (1.0 - s.alpha[k]) / s.alpha[k];
                let rhs = mf * gp * gp / g;
                prop_assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1e-300) || (k == 0 && lhs == 0.0));
            }
        }
    }
}
