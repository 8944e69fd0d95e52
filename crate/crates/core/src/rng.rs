//! Reproducible random streams.
//!
//! Every consumer draws from a ChaCha8 keystream keyed by a user seed and
//! addressed by a 64-bit stream id, so block `b` of a simulation is the same
//! sequence no matter how many workers run or in which order. Gaussians are
//! produced by inverting the normal CDF on a 53-bit open-interval uniform.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc_inv;

/// A counter-based stream: `(seed, stream)` fully determines the output.
#[derive(Clone, Debug)]
pub struct Stream {
    inner: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Stream { inner }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by inverse CDF.
    #[inline]
    pub fn normal(&mut self) -> f64 {
        inverse_normal_cdf(self.uniform())
    }

    /// Standard normal conditioned on `|z| <= bound`, by rejection.
    pub fn truncated_normal(&mut self, bound: f64) -> f64 {
        loop {
            let z = self.normal();
            if z.abs() <= bound {
                return z;
            }
        }
    }
}

/// Inverse of the standard normal CDF for `p` in (0, 1).
#[inline]
pub fn inverse_normal_cdf(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Derive a child seed from a parent seed and a label, used to give
/// independent components (pool, batches, initialisation) their own keys.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    // splitmix64 finaliser over the combined word
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: Vec<u64> = (0..8).scan(Stream::new(7, 0), |s, _| Some(s.next_u64())).collect();
        let b: Vec<u64> = (0..8).scan(Stream::new(7, 0), |s, _| Some(s.next_u64())).collect();
        let c: Vec<u64> = (0..8).scan(Stream::new(7, 1), |s, _| Some(s.next_u64())).collect();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn uniform_stays_inside_open_interval() {
        let mut s = Stream::new(1, 0);
        for _ in 0..10_000 {
            let u = s.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }

    #[test]
    fn inverse_cdf_known_quantiles() {
        assert!(inverse_normal_cdf(0.5).abs() < 1e-15);
        assert!((inverse_normal_cdf(0.975) - 1.959_963_984_540_054).abs() < 1e-9);
        assert!((inverse_normal_cdf(0.025) + 1.959_963_984_540_054).abs() < 1e-9);
    }

    #[test]
    fn normal_moments() {
        let mut s = Stream::new(3, 9);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| s.normal()).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() < 0.02);
    }

    #[test]
    fn truncated_normal_respects_bound() {
        let mut s = Stream::new(11, 0);
        assert!((0..10_000).all(|_| s.truncated_normal(2.0).abs() <= 2.0));
    }
}
