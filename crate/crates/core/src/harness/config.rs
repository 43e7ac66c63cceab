use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::golden::CODEBOOK_MAX_ORDER;

/// Default early-stop threshold: a point ends once this many bit errors are seen.
pub const DEFAULT_TARGET_ERRORS: u64 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scheme {
    /// Golden Code over SVD beamforming, decoupled sphere decoding.
    #[serde(rename = "gcmb")]
    Gcmb,
    /// Golden Code over the plain MIMO channel, exhaustive joint ML.
    #[serde(rename = "gc-ml")]
    GcMl,
    /// Perfect code of dimension S over SVD beamforming.
    #[serde(rename = "pcmb")]
    Pcmb,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Gcmb => "gcmb",
            Scheme::GcMl => "gc-ml",
            Scheme::Pcmb => "pcmb",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gcmb" => Ok(Scheme::Gcmb),
            "gc-ml" => Ok(Scheme::GcMl),
            "pcmb" => Ok(Scheme::Pcmb),
            other => Err(Error::Config(format!("unknown scheme `{other}`; expected gcmb, gc-ml or pcmb"))),
        }
    }
}

/// Complete description of one Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub order: usize,
    pub snr_db: Vec<f64>,
    /// Upper bound on trials per SNR point.
    pub trials: u64,
    /// Stop a point early once this many bit errors are reached.
    pub target_errors: Option<u64>,
    pub seed: u64,
    pub dim: usize,
    pub generator: Option<PathBuf>,
    /// Disables noise entirely (validation runs).
    pub noiseless: bool,
}

impl SimConfig {
    pub fn new(scheme: Scheme, order: usize, snr_db: Vec<f64>, trials: u64, seed: u64) -> Self {
        Self {
            scheme,
            order,
            snr_db,
            trials,
            target_errors: Some(DEFAULT_TARGET_ERRORS),
            seed,
            dim: 2,
            generator: None,
            noiseless: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.snr_db.is_empty() {
            return Err(Error::Config("SNR list is empty".into()));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR values must be finite".into()));
        }
        if self.snr_db.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("SNR list must be strictly increasing".into()));
        }
        if !matches!(self.order, 4 | 16 | 64 | 256) {
            return Err(Error::Config(format!("unsupported QAM order {}; expected 4, 16, 64 or 256", self.order)));
        }
        match self.scheme {
            Scheme::Gcmb | Scheme::GcMl if self.dim != 2 => {
                return Err(Error::Config(format!("{} is a 2x2 scheme; --dim must be 2", self.scheme)));
            }
            Scheme::GcMl if self.order > CODEBOOK_MAX_ORDER => {
                return Err(Error::Config(format!(
                    "gc-ml searches all M^4 codewords and is limited to M <= {CODEBOOK_MAX_ORDER}"
                )));
            }
            Scheme::Pcmb => match self.dim {
                2 => {}
                4 if self.generator.is_some() => {}
                4 => return Err(Error::Config("pcmb with --dim 4 needs --generator <file>".into())),
                3 | 6 => {
                    return Err(Error::UnsupportedDimension(format!(
                        "pcmb decoding for S = {} (HEX constellations) is not supported",
                        self.dim
                    )))
                }
                d => return Err(Error::Config(format!("unsupported dimension {d}; expected 2 or 4"))),
            },
            _ => {}
        }
        Ok(())
    }

    /// Information bits carried by one codeword.
    pub fn bits_per_codeword(&self) -> u64 {
        (self.dim * self.dim) as u64 * u64::from(self.order.trailing_zeros())
    }
}

/// Inclusive SNR grid `start, start+step, …, ≤ stop`.
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
        return Err(Error::Config("SNR grid needs finite bounds and a positive step".into()));
    }
    if stop < start {
        return Err(Error::Config(format!("--snr-stop {stop} is below --snr-start {start}")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}
