//! Deterministic random streams.
//!
//! Every random quantity in the crate (row indices, Gaussian entries,
//! Bernoulli masks) is drawn from [`SplitMix64`], a counter-based 64-bit
//! generator: the n-th output is `mix(seed + n * 0x9E3779B97F4A7C15)` with the
//! standard SplitMix64 finalizer. The recipe is small enough to re-implement
//! bit-exactly in any language, which keeps index sequences reproducible
//! across platforms.
//!
//! Integer ranges use rejection sampling (no modulo bias); Gaussians use the
//! Marsaglia polar transform.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    spare_normal: Option<f64>,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self {
            state: seed,
            spare_normal: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform integer in `0..bound`, unbiased.
    #[inline]
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        // 2^64 mod bound: outputs below this would over-represent small values.
        let threshold = bound.wrapping_neg() % bound;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % bound;
            }
        }
    }

    /// Uniform double in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal deviate (Marsaglia polar method, spare value cached).
    pub fn next_normal(&mut self) -> f64 {
        if let Some(v) = self.spare_normal.take() {
            return v;
        }
        loop {
            let u = 2.0 * self.next_f64() - 1.0;
            let v = 2.0 * self.next_f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare_normal = Some(v * f);
                return u * f;
            }
        }
    }
}

/// The row-selection stream `i(0), i(1), ...` shared by all randomized solvers.
#[derive(Debug, Clone)]
pub struct IndexStream {
    seed: u64,
    rng: SplitMix64,
    drawn: u64,
}

impl IndexStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            rng: SplitMix64::new(seed),
            drawn: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Number of indices consumed so far.
    pub fn drawn(&self) -> u64 {
        self.drawn
    }

    /// Next row index, uniform over `0..m`.
    #[inline]
    pub fn next_index(&mut self, m: usize) -> usize {
        self.drawn += 1;
        self.rng.next_below(m as u64) as usize
    }
}
