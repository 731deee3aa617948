//! Seedable random streams with deterministic substream derivation.
//!
//! A stream is identified by `(seed, stream id)`. The seed is expanded into a
//! ChaCha8 key and the stream id selects the ChaCha stream, so substreams are
//! pure functions of their identifiers and never overlap.

use rand::distr::{Distribution, Open01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    /// Child stream `id` of this stream; `new(s).substream(r).substream(k)`
    /// is the stream for the path `(s, r, k)`.
    pub fn substream(&self, id: u64) -> RngStream {
        let stream = splitmix64(self.stream ^ splitmix64(id.wrapping_add(0x5851_f42d_4c95_7f2d)));
        RngStream::with_stream(self.seed, stream)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform on the open interval (0, 1).
    pub fn uniform(&mut self) -> f64 {
        Open01.sample(&mut self.rng)
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Laplace variate scaled to unit variance.
    pub fn double_exponential(&mut self) -> f64 {
        let b = std::f64::consts::FRAC_1_SQRT_2;
        let u = self.uniform() - 0.5;
        -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
    }

    /// `exp(sigma * Z)` with `Z` standard normal.
    pub fn lognormal(&mut self, sigma: f64) -> f64 {
        (sigma * self.standard_normal()).exp()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_streams_repeat() {
        let mut a = RngStream::new(7).substream(3);
        let mut b = RngStream::new(7).substream(3);
        let xa: Vec<f64> = (0..10).map(|_| a.standard_normal()).collect();
        let xb: Vec<f64> = (0..10).map(|_| b.standard_normal()).collect();
        assert_eq!(xa, xb);
        let mut c = RngStream::new(7).substream(4);
        assert_ne!(xa[0], c.standard_normal());
    }

    #[test]
    fn nested_paths_differ() {
        let base = RngStream::new(1);
        let a = base.substream(2).substream(1).stream();
        let b = base.substream(1).substream(2).stream();
        let c = base.substream(2).stream();
        assert_ne!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn double_exponential_has_unit_variance() {
        let mut s = RngStream::new(11);
        let n = 1_000_000;
        let (mut m1, mut m2) = (0.0, 0.0);
        for _ in 0..n {
            let x = s.double_exponential();
            m1 += x;
            m2 += x * x;
        }
        let mean = m1 / n as f64;
        let var = m2 / n as f64 - mean * mean;
        assert!(mean.abs() < 0.005, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn lognormal_median_is_one() {
        let mut s = RngStream::new(12);
        let mut xs: Vec<f64> = (0..1_000_000).map(|_| s.lognormal(1.0)).collect();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let med = 0.5 * (xs[499_999] + xs[500_000]);
        assert!((med - 1.0).abs() < 0.01, "median {med}");
    }

    #[test]
    fn uniform_moments() {
        let mut s = RngStream::new(13);
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| s.uniform()).sum::<f64>() / n as f64;
        // se = sqrt(1/12 / n) ≈ 2.9e-4
        assert!((mean - 0.5).abs() < 5.0 * 2.9e-4);
    }
}
