use serde::{Deserialize, Serialize};

use super::SpectralData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundKind {
    /// `E‖x_j − P(x_j)‖² ≤ (1 − λ_min/m)^j e0`, `e0 = ‖x_0 − P(x_0)‖²`.
    #[serde(rename = "RK_EQ51")]
    RkEq51,
    /// `E‖v_j − x*‖²_{(AᵀA)⁺} ≤ 4 W0 / (σ1^j + σ2^j)²`.
    #[serde(rename = "ARK_THM_V")]
    ArkThmV,
    /// `E‖x_j − x*‖² ≤ 4 λ W0 / (σ1^j − σ2^j)²`; the sublinear form at `λ = 0`.
    #[serde(rename = "ARK_THM_X")]
    ArkThmX,
    /// `E‖x_j − x*‖² ≤ 4 m² W0 / j²`.
    #[serde(rename = "ARK_SUBLINEAR")]
    ArkSublinear,
    /// `‖A x_j − b‖² ≤ ((√λmax − √λmin)/(√λmax + √λmin))^{2j} ‖A x_0 − b‖²`.
    #[serde(rename = "CG_EQ55")]
    CgEq55,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::RkEq51 => "RK_EQ51",
            BoundKind::ArkThmV => "ARK_THM_V",
            BoundKind::ArkThmX => "ARK_THM_X",
            BoundKind::ArkSublinear => "ARK_SUBLINEAR",
            BoundKind::CgEq55 => "CG_EQ55",
        }
    }
}

/// A theoretical error envelope as a function of the iteration count.
///
/// `initial` is the kind's starting quantity: `e0` for RK, `W0 = ‖x_0 − x*‖²_{(AᵀA)⁺}`
/// for the accelerated kinds, and `‖A x_0 − b‖²` for CG. `lambda` is
/// `λ_min` for RK and CG and the schedule parameter for the accelerated kinds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundEnvelope {
    pub kind: BoundKind,
    pub m: usize,
    pub lambda: f64,
    pub lambda_max: f64,
    pub initial: f64,
}

impl BoundEnvelope {
    pub fn rk(m: usize, lambda_min: f64, e0: f64) -> Self {
        Self::new(BoundKind::RkEq51, m, lambda_min, f64::NAN, e0)
    }

    pub fn ark_v(m: usize, lambda: f64, w0: f64) -> Self {
        Self::new(BoundKind::ArkThmV, m, lambda, f64::NAN, w0)
    }

    pub fn ark_x(m: usize, lambda: f64, w0: f64) -> Self {
        Self::new(BoundKind::ArkThmX, m, lambda, f64::NAN, w0)
    }

    pub fn ark_sublinear(m: usize, w0: f64) -> Self {
        Self::new(BoundKind::ArkSublinear, m, 0.0, f64::NAN, w0)
    }

    pub fn cg(lambda_min: f64, lambda_max: f64, r0_sq: f64) -> Self {
        Self::new(BoundKind::CgEq55, 0, lambda_min, lambda_max, r0_sq)
    }

    fn new(kind: BoundKind, m: usize, lambda: f64, lambda_max: f64, initial: f64) -> Self {
        Self {
            kind,
            m,
            lambda,
            lambda_max,
            initial,
        }
    }

    /// Bound on iterate `k + 1`, matching the theorem statements.
    pub fn eval(&self, k: usize) -> f64 {
        self.at_iterate(k + 1)
    }

    /// Bound on iterate `j`; `at_iterate(0)` is the initial quantity where
    /// that is meaningful and `+inf` where the formula is vacuous.
    pub fn at_iterate(&self, j: usize) -> f64 {
        let m = self.m as f64;
        let jf = j as f64;
        match self.kind {
            BoundKind::RkEq51 => self.initial * (1.0 - self.lambda / m).powf(jf),
            BoundKind::ArkThmV => {
                // ln(σ1^j + σ2^j) = a + ln(1 + e^{b-a})
                let (a, b) = self.log_sigma_powers(jf);
                let log_sum = a + (b - a).exp().ln_1p();
                4.0 * self.initial * (-2.0 * log_sum).exp()
            }
            BoundKind::ArkThmX if self.lambda == 0.0 => sublinear(m, self.initial, jf),
            BoundKind::ArkThmX => {
                // ln(σ1^j − σ2^j) = a + ln(−expm1(b − a)), free of cancellation and overflow
                let (a, b) = self.log_sigma_powers(jf);
                let log_diff = a + (-(b - a).exp_m1()).ln();
                4.0 * self.lambda * self.initial * (-2.0 * log_diff).exp()
            }
            BoundKind::ArkSublinear => sublinear(m, self.initial, jf),
            BoundKind::CgEq55 => {
                let (lo, hi) = (self.lambda.sqrt(), self.lambda_max.sqrt());
                let ratio = (hi - lo) / (hi + lo);
                self.initial * ratio.powi(2).powi(j as i32)
            }
        }
    }

    /// `(j ln σ1, j ln σ2)`.
    fn log_sigma_powers(&self, j: f64) -> (f64, f64) {
        let h = self.lambda.sqrt() / (2.0 * self.m as f64);
        (j * h.ln_1p(), j * (-h).ln_1p())
    }
}

fn sublinear(m: f64, w0: f64, j: f64) -> f64 {
    if j == 0.0 {
        f64::INFINITY
    } else {
        4.0 * m * m * w0 / (j * j)
    }
}

/// Builds the envelope of `kind`, taking `λ_min`/`λ_max` from `spectral`
/// where the kind needs them.
pub fn bound_envelope(
    kind: BoundKind,
    spectral: &SpectralData,
    m: usize,
    lambda: f64,
    initial: f64,
) -> BoundEnvelope {
    match kind {
        BoundKind::RkEq51 => BoundEnvelope::rk(m, spectral.lambda_min, initial),
        BoundKind::ArkThmV => BoundEnvelope::ark_v(m, lambda, initial),
        BoundKind::ArkThmX => BoundEnvelope::ark_x(m, lambda, initial),
        BoundKind::ArkSublinear => BoundEnvelope::ark_sublinear(m, initial),
        BoundKind::CgEq55 => BoundEnvelope::cg(spectral.lambda_min, spectral.lambda_max, initial),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rk_first_step() {
        let e = BoundEnvelope::rk(100, 0.3, 2.0);
        assert!((e.eval(0) - 2.0 * (1.0 - 0.003)).abs() < 1e-15);
        assert_eq!(e.at_iterate(0), 2.0);
    }

    #[test]
    fn cg_single_eigenvalue() {
        let e = BoundEnvelope::cg(2.5, 2.5, 7.0);
        assert_eq!(e.at_iterate(0), 7.0);
        for k in 0..5 {
            assert_eq!(e.eval(k), 0.0);
        }
    }

    #[test]
    fn thm_x_tends_to_sublinear() {
        let (m, w0) = (50, 3.0);
        let sub = BoundEnvelope::ark_sublinear(m, w0);
        let x = BoundEnvelope::ark_x(m, 1e-14, w0);
        for k in [0, 9, 99, 999] {
            let (s, t) = (sub.eval(k), x.eval(k));
            assert!((s - t).abs() <= 1e-6 * s, "k={k}: {s} vs {t}");
        }
        assert_eq!(BoundEnvelope::ark_x(m, 0.0, w0).eval(10), sub.eval(10));
        assert_eq!(sub.eval(0), 4.0 * 2500.0 * 3.0);
    }

    #[test]
    fn thm_v_initial_value() {
        // σ1^0 + σ2^0 = 2, so the bound starts at W0
        assert!((BoundEnvelope::ark_v(10, 0.5, 4.0).at_iterate(0) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn thm_closed_forms() {
        let (m, lambda, w0) = (7usize, 0.8f64, 1.5);
        let h = lambda.sqrt() / (2.0 * m as f64);
        let (s1, s2) = (1.0 + h, 1.0 - h);
        for j in [1, 2, 10, 100] {
            let v = 4.0 * w0 / (s1.powi(j) + s2.powi(j)).powi(2);
            let x = 4.0 * lambda * w0 / (s1.powi(j) - s2.powi(j)).powi(2);
            assert!(
                (BoundEnvelope::ark_v(m, lambda, w0).at_iterate(j as usize) - v).abs() <= 1e-12 * v
            );
            assert!(
                (BoundEnvelope::ark_x(m, lambda, w0).at_iterate(j as usize) - x).abs() <= 1e-10 * x
            );
        }
    }

    #[test]
    fn serde_names() {
        assert_eq!(
            serde_json::to_string(&BoundKind::ArkThmV).unwrap(),
            "\"ARK_THM_V\""
        );
    }

    proptest! {
        #[test]
        fn envelopes_nonincreasing(m in 1usize..5000, frac in 1e-6f64..1.0, k in 0usize..100_000) {
            let lambda = frac * m as f64;
            let envs = [
                BoundEnvelope::rk(m, lambda, 1.0),
                BoundEnvelope::ark_v(m, lambda, 1.0),
                BoundEnvelope::ark_x(m, lambda, 1.0),
                BoundEnvelope::ark_sublinear(m, 1.0),
                BoundEnvelope::cg(lambda, lambda * 10.0, 1.0),
            ];
            for e in envs {
                prop_assert!(e.eval(k + 1) <= e.eval(k), "{:?} at {k}", e.kind);
            }
        }
    }
}
