use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Seeded, portable random stream (ChaCha8).
///
/// Parallel work never shares a stream: each unit derives its own child with
/// [`SeededRng::child`], keyed by the run seed and two indices.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Independent stream for `(seed, outer, inner)`, e.g. (SNR index, trial index).
    pub fn child(seed: u64, outer: u64, inner: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(splitmix64(outer.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ splitmix64(inner)));
        Self { seed, inner: rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Circularly symmetric complex Gaussian with total variance `variance`
    /// (each component gets `variance / 2`).
    pub fn complex_gaussian(&mut self, variance: f64) -> Result<Complex64> {
        if !(variance > 0.0) || !variance.is_finite() {
            return Err(Error::Config(format!("noise variance must be positive, got {variance}")));
        }
        let sd = (variance / 2.0).sqrt();
        let re: f64 = self.inner.sample(StandardNormal);
        let im: f64 = self.inner.sample(StandardNormal);
        Ok(Complex64::new(re * sd, im * sd))
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.random()
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_sequence() {
        let mut a = SeededRng::new(1234);
        let mut b = SeededRng::new(1234);
        for _ in 0..1000 {
            assert_eq!(a.complex_gaussian(1.0).unwrap(), b.complex_gaussian(1.0).unwrap());
        }
    }

    #[test]
    fn children_are_distinct_and_reproducible() {
        let x = SeededRng::child(5, 0, 1).complex_gaussian(1.0).unwrap();
        let y = SeededRng::child(5, 1, 0).complex_gaussian(1.0).unwrap();
        let z = SeededRng::child(5, 0, 1).complex_gaussian(1.0).unwrap();
        assert_ne!(x, y);
        assert_eq!(x, z);
    }

    #[test]
    fn rejects_non_positive_variance() {
        let mut r = SeededRng::new(0);
        assert!(r.complex_gaussian(0.0).is_err());
        assert!(r.complex_gaussian(-1.0).is_err());
        assert!(r.complex_gaussian(f64::NAN).is_err());
    }

    #[test]
    fn moments_of_complex_gaussian() {
        let mut r = SeededRng::new(2024);
        let n = 1_000_000;
        let (mut sr, mut si, mut qr, mut qi) = (0.0, 0.0, 0.0, 0.0);
        for _ in 0..n {
            let z = r.complex_gaussian(2.0).unwrap();
            sr += z.re;
            si += z.im;
            qr += z.re * z.re;
            qi += z.im * z.im;
        }
        let nf = n as f64;
        // Each component has unit variance: standard error of the mean is 1/√n.
        let five_sigma = 5.0 / nf.sqrt();
        assert!((sr / nf).abs() < five_sigma);
        assert!((si / nf).abs() < five_sigma);
        let vr = qr / nf - (sr / nf).powi(2);
        let vi = qi / nf - (si / nf).powi(2);
        assert!((0.99..=1.01).contains(&vr), "{vr}");
        assert!((0.99..=1.01).contains(&vi), "{vi}");
    }
}
