//! Curve post-processing: diversity slope and SNR gap at a target BER.

use super::sweep::BerRecord;
use crate::error::{Error, Result};

/// Magnitude of the least-squares slope of `log10(BER)` against
/// `log10(SNR) = snr_db / 10`, over the points with `lo ≤ BER ≤ hi`.
pub fn estimate_diversity_slope(records: &[BerRecord], window: (f64, f64)) -> Result<f64> {
    let (hi, lo) = window;
    if !(hi > lo && lo > 0.0) {
        return Err(Error::Config(format!("BER window ({hi}, {lo}) must satisfy hi > lo > 0")));
    }
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.ber >= lo && r.ber <= hi)
        .map(|r| (r.snr_db / 10.0, r.ber.log10()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "{} point(s) with BER in [{lo:e}, {hi:e}]; need at least 2",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all points in the window share one SNR".into()));
    }
    Ok((sxy / sxx).abs())
}

/// SNR (dB) at which a curve first falls to `target`, interpolated linearly
/// in `log10(BER)` between the bracketing points.
pub fn snr_at_ber(curve: &[BerRecord], target: f64) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::Config("target BER must be positive".into()));
    }
    let lt = target.log10();
    for w in curve.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.ber >= target && b.ber <= target {
            if a.ber == b.ber {
                return Ok(a.snr_db);
            }
            if b.ber == 0.0 {
                // Can't interpolate in log domain towards zero.
                return Err(Error::InsufficientData(format!("zero BER at {} dB next to the crossing", b.snr_db)));
            }
            let (la, lb) = (a.ber.log10(), b.ber.log10());
            return Ok(a.snr_db + (lt - la) / (lb - la) * (b.snr_db - a.snr_db));
        }
    }
    Err(Error::InsufficientData(format!("curve never crosses BER {target:e}")))
}

/// `SNR_A − SNR_B` at the target BER, in dB.
pub fn gap_at_ber(curve_a: &[BerRecord], curve_b: &[BerRecord], target: f64) -> Result<f64> {
    Ok(snr_at_ber(curve_a, target)? - snr_at_ber(curve_b, target)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Scheme;

    fn curve(f: impl Fn(f64) -> f64) -> Vec<BerRecord> {
        (0..=40)
            .map(|i| {
                let snr_db = i as f64;
                BerRecord {
                    scheme: Scheme::Gcmb,
                    m: 4,
                    snr_db,
                    trials: 1,
                    bit_errors: 0,
                    ber: f(10f64.powf(snr_db / 10.0)),
                    max_nodes: 0,
                    mean_nodes: 0.0,
                    elapsed_seconds: None,
                    seed: 0,
                }
            })
            .collect()
    }

    #[test]
    fn slope_of_power_laws() {
        let c4 = curve(|s| s.powi(-4));
        assert!((estimate_diversity_slope(&c4, (1e-2, 1e-4)).unwrap() - 4.0).abs() < 0.01);
        let c1 = curve(|s| 1.0 / s);
        assert!((estimate_diversity_slope(&c1, (1e-1, 1e-3)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn slope_needs_two_points() {
        let c = curve(|s| s.powi(-4));
        assert!(matches!(estimate_diversity_slope(&c[..3], (1e-2, 1e-4)), Err(Error::InsufficientData(_))));
        assert!(estimate_diversity_slope(&c, (1e-4, 1e-2)).is_err());
    }

    #[test]
    fn gaps() {
        let a = curve(|s| 0.5 * (-s / 10.0).exp() + s.powi(-2));
        assert!(gap_at_ber(&a, &a, 1e-3).unwrap().abs() < 1e-12);
        // b reaches every BER 2 dB earlier than a.
        let shift = 10f64.powf(0.2);
        let b = curve(|s| s.powi(-4));
        let a = curve(|s| (s / shift).powi(-4));
        let g = gap_at_ber(&a, &b, 1e-3).unwrap();
        assert!((g - 2.0).abs() < 0.05, "{g}");
        assert!(gap_at_ber(&a, &b, 1e-30).is_err());
    }
}
