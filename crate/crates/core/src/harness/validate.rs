//! The invariant suite behind `gcmb validate`.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Scheme, SimConfig};
use super::sweep::{complexity_report, run_ber_sweep, shared_observation_agreement};
use crate::channel::sample_channel;
use crate::error::Result;
use crate::golden::{effective_channel, golden_encode, golden_encode_lattice, min_det_4qam, GoldenConstants, SymbolPair};
use crate::numerics::{Constellation, SeededRng};
use crate::pstbc::{pstbc_encode, PerfectCodeSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name, passed, detail }
}

/// Trial counts of the suite. `quick` divides the heavy checks by 10.
#[derive(Debug, Clone, Copy)]
pub struct ValidationSize {
    pub realness_channels: u64,
    pub oracle_trials: u64,
    pub budget_trials: u64,
}

impl ValidationSize {
    pub fn full() -> Self {
        Self {
            realness_channels: 100_000,
            oracle_trials: 10_000,
            budget_trials: 50_000,
        }
    }

    pub fn quick() -> Self {
        Self {
            realness_channels: 10_000,
            oracle_trials: 1_000,
            budget_trials: 5_000,
        }
    }
}

fn all_4qam_inputs() -> impl Iterator<Item = [usize; 4]> {
    (0..256).map(|n| [n >> 6, (n >> 4) & 3, (n >> 2) & 3, n & 3])
}

/// Largest entrywise gap between the closed-form and layered Golden encoders
/// over all 256 4-QAM inputs.
pub fn encoder_equivalence_gap() -> f64 {
    let c = Constellation::qam(4).expect("4-QAM");
    all_4qam_inputs()
        .map(|idx| {
            let p = SymbolPair::from_indices(&c, &idx);
            let d = golden_encode(&p).sub(&golden_encode_lattice(&p)).expect("2x2");
            d.as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

/// Largest `|Im R|` of `ΛG = QR` over random Rayleigh channels.
pub fn max_imag_r(channels: u64, seed: u64) -> Result<f64> {
    let v = (0..channels)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut rng = SeededRng::child(seed, 1, t);
            let ch = sample_channel(2, 2, &mut rng)?;
            let l = ch.singular_values();
            Ok(effective_channel(&[l[0], l[1]])?.max_imag)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(v.into_iter().fold(0.0, f64::max))
}

pub fn run_validation(size: ValidationSize) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let k = GoldenConstants::get();

    let gerr = k.g.unitarity_error();
    out.push(check("generator unitarity", gerr <= 1e-12, format!("‖GG^H − I‖ = {gerr:e}")));

    let gap = encoder_equivalence_gap();
    out.push(check("encoder equivalence (256 4-QAM inputs)", gap <= 1e-14, format!("max entry gap {gap:e}")));

    let golden = PerfectCodeSpec::golden();
    let c4 = Constellation::qam(4).expect("4-QAM");
    let pgap = all_4qam_inputs()
        .map(|idx| {
            let p = SymbolPair::from_indices(&c4, &idx);
            let x = pstbc_encode(&golden, &[p.x1.to_vec(), p.x2.to_vec()]).expect("2x2");
            x.sub(&golden_encode(&p)).expect("2x2").as_slice().iter().map(|z| z.norm()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    out.push(check("perfect-code S=2 equals Golden Code", pgap <= 1e-14, format!("max entry gap {pgap:e}")));

    out.push(match max_imag_r(size.realness_channels, 0x5EED) {
        Ok(m) => check(
            "R realness",
            m <= 1e-10,
            format!("max |Im R| = {m:e} over {} channels", size.realness_channels),
        ),
        Err(e) => check("R realness", false, e.to_string()),
    });

    out.push(match shared_observation_agreement(4, 8.0, size.oracle_trials, 0xACE) {
        Ok(r) => check(
            "decoupled decoder equals joint ML (4-QAM, 8 dB)",
            r.mismatches == 0,
            format!("{} mismatches in {} trials, max metric gap {:e}", r.mismatches, r.trials, r.max_metric_gap),
        ),
        Err(e) => check("decoupled decoder equals joint ML (4-QAM, 8 dB)", false, e.to_string()),
    });

    for m in [4, 16, 64, 256] {
        let mut cfg = SimConfig::new(Scheme::Gcmb, m, vec![0.0, 10.0, 20.0], size.budget_trials, 0xB0D6E7 + m as u64);
        cfg.target_errors = None;
        out.push(match complexity_report(&cfg) {
            Ok(r) => check(
                "node budget √M",
                r.violations == 0,
                format!("M={m}: max {} ≤ {} over {} subsystem decodes", r.max_nodes, r.bound, r.subsystem_decodes),
            ),
            Err(e) => check("node budget √M", false, e.to_string()),
        });
    }

    let mut cfg = SimConfig::new(Scheme::Gcmb, 64, vec![0.0, 20.0], 2000, 3);
    cfg.noiseless = true;
    out.push(match run_ber_sweep(&cfg) {
        Ok(recs) => {
            let errors: u64 = recs.iter().map(|r| r.bit_errors).sum();
            check("noiseless transmission is error free", errors == 0, format!("{errors} bit errors"))
        }
        Err(e) => check("noiseless transmission is error free", false, e.to_string()),
    });

    let d = min_det_4qam();
    out.push(check("nonvanishing determinant (4-QAM)", d > 0.0, format!("min |det(X − X̂)| = {d:.6}")));
    out
}
