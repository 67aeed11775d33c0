//! Deterministic random streams.
//!
//! Every run draws from exactly one [`RngStream`]. The generator family is
//! fixed to xoshiro256++ seeded through SplitMix64, so equal seeds give equal
//! draw sequences on every platform. Streams for parallel runs are derived
//! from a master seed with [`RngStream::derive`]:
//!
//! ```text
//! run_seed(master, i) = splitmix64_mix(master ^ splitmix64_mix(i + 1))
//! ```
//!
//! where `splitmix64_mix` is the SplitMix64 output finalizer applied to
//! `z + 0x9E3779B97F4A7C15`.

use rand::{Rng, RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

/// Identifier of the generator family, recorded in run metadata.
pub const GENERATOR_FAMILY: &str = "xoshiro256++/splitmix64";

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64_mix(z: u64) -> u64 {
    let mut z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: Xoshiro256PlusPlus,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    /// Seed of the `index`-th run under `master`.
    pub fn derive_seed(master: u64, index: u64) -> u64 {
        splitmix64_mix(master ^ splitmix64_mix(index.wrapping_add(1)))
    }

    /// Stream for the `index`-th run under `master`.
    pub fn derive(master: u64, index: u64) -> Self {
        Self::new(Self::derive_seed(master, index))
    }

    /// Independent child stream keyed by `index`; the parent advances by one draw.
    pub fn split(&mut self, index: u64) -> Self {
        let base = self.inner.next_u64();
        Self::derive(base, index)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Uniform integer in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut p: Vec<usize> = (0..n).collect();
        self.shuffle(&mut p);
        p
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = RngStream::new(42);
        let mut b = RngStream::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn pinned_first_draws() {
        // Pins the generator family: any change here breaks cross-version trace equality.
        let mut r = RngStream::new(0);
        let first = r.next_u64();
        let mut reference = Xoshiro256PlusPlus::seed_from_u64(0);
        assert_eq!(first, reference.next_u64());
        assert_eq!(splitmix64_mix(0), 0xE220_A839_7B1D_CDAF);
    }

    #[test]
    fn derived_streams_differ() {
        let s: Vec<u64> = (0..64).map(|i| RngStream::derive_seed(7, i)).collect();
        let mut sorted = s.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), s.len());
        assert_ne!(RngStream::derive_seed(7, 0), RngStream::derive_seed(8, 0));
    }

    #[test]
    fn uniform_range_and_permutation() {
        let mut r = RngStream::new(3);
        for _ in 0..1000 {
            let u = r.uniform();
            assert!((0.0..1.0).contains(&u));
        }
        let mut p = r.permutation(10);
        p.sort_unstable();
        assert_eq!(p, (0..10).collect::<Vec<_>>());
    }
}
