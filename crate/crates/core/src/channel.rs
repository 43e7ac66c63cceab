//! Quasi-static Rayleigh channels and the two transmission models: SVD
//! beamforming (`Y = ΛX + N`) and plain MIMO (`Y = HX + N`).

use crate::error::{Error, Result};
use crate::numerics::{svd, ComplexMatrix, SeededRng, SvdFactors};

/// One channel draw, held constant over a codeword.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: ComplexMatrix,
    pub factors: SvdFactors,
}

impl ChannelRealization {
    pub fn from_matrix(h: ComplexMatrix) -> Result<Self> {
        let factors = svd(&h)?;
        Ok(Self { h, factors })
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.factors.singular_values
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }
}

/// Operating point. `n0 = S / 10^(snr_db/10)` per complex noise entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrPoint {
    pub snr_db: f64,
    pub n0: f64,
}

impl SnrPoint {
    pub fn new(snr_db: f64, streams: usize) -> Result<Self> {
        if !snr_db.is_finite() {
            return Err(Error::Config(format!("SNR must be finite, got {snr_db}")));
        }
        let n0 = streams as f64 / 10f64.powf(snr_db / 10.0);
        if !(n0 > 0.0) || !n0.is_finite() {
            return Err(Error::Config(format!("SNR {snr_db} dB gives an unusable noise variance")));
        }
        Ok(Self { snr_db, n0 })
    }
}

/// i.i.d. unit-variance complex Gaussian `Nr × Nt` channel and its SVD.
pub fn sample_channel(nr: usize, nt: usize, rng: &mut SeededRng) -> Result<ChannelRealization> {
    if nr != nt || nr == 0 {
        return Err(Error::Dimension(format!("beamforming needs Nr = Nt = S, got {nr}x{nt}")));
    }
    let h = gaussian_matrix(nr, nt, 1.0, rng)?;
    ChannelRealization::from_matrix(h)
}

/// Matrix of i.i.d. circular complex Gaussians with the given variance.
pub fn gaussian_matrix(rows: usize, cols: usize, variance: f64, rng: &mut SeededRng) -> Result<ComplexMatrix> {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = rng.complex_gaussian(variance)?;
        }
    }
    Ok(m)
}

/// Noise matrix at `snr`, or all zeros when `snr` is `None`.
pub fn sample_noise(s: usize, snr: Option<&SnrPoint>, rng: &mut SeededRng) -> Result<ComplexMatrix> {
    match snr {
        Some(p) => gaussian_matrix(s, s, p.n0, rng),
        None => Ok(ComplexMatrix::zeros(s, s)),
    }
}

fn check_dims(x: &ComplexMatrix, s: usize) -> Result<()> {
    if x.rows() != s || x.cols() != s {
        return Err(Error::Dimension(format!("codeword is {}x{}, channel is {s}x{s}", x.rows(), x.cols())));
    }
    Ok(())
}

/// `Λ X + N` for a given noise matrix (the modelled beamformed path).
pub fn beamformed_observation(x: &ComplexMatrix, chan: &ChannelRealization, noise: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(x, chan.dim())?;
    x.scale_rows(chan.singular_values()).add(noise)
}

/// `U^H (H V X + N_air)`: precoding by `V`, the physical channel, receive
/// combining by `U^H`.
pub fn explicit_observation(x: &ComplexMatrix, chan: &ChannelRealization, noise_air: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(x, chan.dim())?;
    let tx = chan.factors.v.matmul(x)?;
    let rx = chan.h.matmul(&tx)?.add(noise_air)?;
    chan.factors.u.adjoint().matmul(&rx)
}

/// `H X + N`.
pub fn plain_observation(x: &ComplexMatrix, h: &ComplexMatrix, noise: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_dims(x, h.rows())?;
    h.matmul(x)?.add(noise)
}

/// Beamformed transmission `Y = ΛX + N`; noiseless when `snr` is `None`.
pub fn gcmb_channel_apply(
    x: &ComplexMatrix,
    chan: &ChannelRealization,
    snr: Option<&SnrPoint>,
    rng: &mut SeededRng,
) -> Result<ComplexMatrix> {
    let n = sample_noise(chan.dim(), snr, rng)?;
    beamformed_observation(x, chan, &n)
}

/// Beamformed transmission through the explicit `U^H H V` chain, for cross-checks.
pub fn gcmb_channel_apply_explicit(
    x: &ComplexMatrix,
    chan: &ChannelRealization,
    snr: Option<&SnrPoint>,
    rng: &mut SeededRng,
) -> Result<ComplexMatrix> {
    let n = sample_noise(chan.dim(), snr, rng)?;
    explicit_observation(x, chan, &n)
}

/// Plain MIMO transmission `Y = HX + N` (the Golden Code without beamforming).
pub fn gc_baseline_apply(
    x: &ComplexMatrix,
    h: &ComplexMatrix,
    snr: Option<&SnrPoint>,
    rng: &mut SeededRng,
) -> Result<ComplexMatrix> {
    let n = sample_noise(h.rows(), snr, rng)?;
    plain_observation(x, h, &n)
}
