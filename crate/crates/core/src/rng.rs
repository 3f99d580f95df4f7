//! Seeded, splittable randomness.
//!
//! Every generator is ChaCha20 keyed by a 64-bit seed; independent workers
//! use distinct stream ids of the same key, so results never depend on
//! scheduling.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::torus::Torus;

/// Stream ids reserved for the different consumers of a seed.
pub mod streams {
    pub const SECRET_KEYS: u64 = 1;
    pub const CLOUD_KEYS: u64 = 2;
    pub const ENCRYPTION: u64 = 3;
    pub const TRIALS: u64 = 1 << 40;
}

#[derive(Debug, Clone)]
pub struct DetRng {
    inner: ChaCha20Rng,
}

impl DetRng {
    pub fn new(seed: u64) -> DetRng {
        DetRng { inner: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn stream(seed: u64, stream: u64) -> DetRng {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        DetRng { inner }
    }

    /// Independent generator for trial `index`.
    pub fn trial(seed: u64, index: u64) -> DetRng {
        Self::stream(seed, streams::TRIALS + index)
    }

    /// Child generator seeded from this one.
    pub fn fork(&mut self) -> DetRng {
        DetRng::new(self.inner.next_u64())
    }

    pub fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn bit(&mut self) -> u8 {
        (self.inner.next_u32() & 1) as u8
    }

    pub fn uniform_torus(&mut self) -> Torus {
        Torus(self.inner.next_u32())
    }

    pub fn fill_uniform(&mut self, out: &mut [Torus]) {
        for t in out {
            *t = Torus(self.inner.next_u32());
        }
    }

    pub fn below(&mut self, bound: u64) -> u64 {
        self.inner.random_range(0..bound)
    }

    pub fn range_i32(&mut self, lo: i32, hi_inclusive: i32) -> i32 {
        self.inner.random_range(lo..=hi_inclusive)
    }

    pub fn gaussian(&mut self, stddev: f64) -> f64 {
        if stddev == 0.0 {
            return 0.0;
        }
        Normal::new(0.0, stddev).expect("finite stddev").sample(&mut self.inner)
    }

    pub fn inner(&mut self) -> &mut ChaCha20Rng {
        &mut self.inner
    }
}

/// Centered Gaussian on the torus, rounded to the `2^-32` grid.
pub fn sample_torus_gaussian(stddev: f64, rng: &mut DetRng) -> Torus {
    if stddev == 0.0 {
        return Torus::ZERO;
    }
    Torus::from_f64(rng.gaussian(stddev))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u32> = (0..4).map({
            let mut r = DetRng::stream(9, 5);
            move |_| r.next_u32()
        }).collect();
        let b: Vec<u32> = (0..4).map({
            let mut r = DetRng::stream(9, 5);
            move |_| r.next_u32()
        }).collect();
        let c: Vec<u32> = (0..4).map({
            let mut r = DetRng::stream(9, 6);
            move |_| r.next_u32()
        }).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_stddev_is_exact() {
        let mut r = DetRng::new(1);
        assert_eq!(sample_torus_gaussian(0.0, &mut r), Torus::ZERO);
    }

    #[test]
    fn gaussian_statistics() {
        let sigma = 1e-3;
        let mut r = DetRng::new(11);
        let n = 100_000;
        let xs: Vec<f64> = (0..n).map(|_| sample_torus_gaussian(sigma, &mut r).to_f64()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
        assert!((sd / sigma - 1.0).abs() < 0.05, "sd {sd}");
        assert!(mean.abs() < 4.0 * sigma / (n as f64).sqrt(), "mean {mean}");
    }
}
