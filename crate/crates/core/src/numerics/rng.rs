//! Seeded pseudo-random stream.
//!
//! The generator is xoshiro256** (Blackman & Vigna) with its 256-bit state
//! expanded from the 64-bit seed by SplitMix64. Only integer operations with
//! defined wrapping semantics are used, so a seed yields the same sequence on
//! every platform. Floats are built from the top 53 bits of an output word.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RngStream {
    seed: u64,
    state: [u64; 4],
}

fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        let mut sm = seed;
        let state = [
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
            splitmix64(&mut sm),
        ];
        RngStream { seed, state }
    }

    /// An independent stream keyed by `(seed, tag)`. Used to give each
    /// pipeline stage its own generator so that changing one stage's draws
    /// does not perturb another's.
    pub fn derive(seed: u64, tag: u64) -> Self {
        let mut sm = seed ^ tag.wrapping_mul(0xD1B5_4A32_D192_ED03);
        RngStream::new(splitmix64(&mut sm))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let s = &mut self.state;
        let result = s[1].wrapping_mul(5).rotate_left(7).wrapping_mul(9);
        let t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = s[3].rotate_left(45);
        result
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::contract(format!(
                "uniform interval [{lo}, {hi}) is empty or unbounded"
            )));
        }
        let v = lo + (hi - lo) * self.next_f64();
        // Rounding in the affine map can land exactly on `hi`.
        Ok(if v < hi { v } else { lo })
    }

    /// Uniform on the open interval `(0, 1)`.
    #[inline]
    pub fn open01(&mut self) -> f64 {
        loop {
            let v = self.next_f64();
            if v > 0.0 {
                return v;
            }
        }
    }

    /// Uniform integer in `0..n` by rejection, free of modulo bias.
    #[inline]
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.next_u64();
            if v < zone {
                return (v % n) as usize;
            }
        }
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Standard normal draw (Box–Muller, one value per call).
    pub fn normal(&mut self) -> f64 {
        let u1 = self.open01();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Free-function form of [`RngStream::uniform`].
pub fn rng_uniform(rng: &mut RngStream, lo: f64, hi: f64) -> Result<f64> {
    rng.uniform(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        assert_ne!(RngStream::new(1).next_u64(), RngStream::new(2).next_u64());
    }

    #[test]
    fn reference_vector() {
        // xoshiro256** from state [1, 2, 3, 4] (reference C implementation).
        let mut rng = RngStream {
            seed: 0,
            state: [1, 2, 3, 4],
        };
        let expected: [u64; 4] = [11520, 0, 1509978240, 1215971899390074240];
        for e in expected {
            assert_eq!(rng.next_u64(), e);
        }
    }

    #[test]
    fn uniform_mean_and_support() {
        let mut rng = RngStream::new(7);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let v = rng.uniform(0.0, 1.0).unwrap();
            assert!((0.0..1.0).contains(&v));
            sum += v;
        }
        assert!((sum / n as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn uniform_rejects_empty_interval() {
        let mut rng = RngStream::new(0);
        assert!(rng.uniform(1.0, 1.0).is_err());
        assert!(rng.uniform(2.0, 1.0).is_err());
    }

    #[test]
    fn normal_moments() {
        let mut rng = RngStream::new(3);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn below_covers_range_uniformly() {
        let mut rng = RngStream::new(11);
        let mut counts = [0usize; 5];
        for _ in 0..50_000 {
            counts[rng.below(5)] += 1;
        }
        for c in counts {
            assert!((c as f64 - 10_000.0).abs() < 500.0, "{counts:?}");
        }
    }

    #[test]
    fn derived_streams_differ() {
        let a = RngStream::derive(5, 1).next_u64();
        let b = RngStream::derive(5, 2).next_u64();
        assert_ne!(a, b);
        assert_eq!(a, RngStream::derive(5, 1).next_u64());
    }
}
