//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use gcmb::channel::{sample_channel, sample_noise, SnrPoint};
use gcmb::golden::effective_channel;
use gcmb::harness::{
    complexity_report, encoder_equivalence_gap, estimate_diversity_slope, gap_at_ber, max_imag_r, run_ber_sweep,
    shared_observation_agreement, BerRecord, Scheme, SimConfig,
};
use gcmb::numerics::{Complex64, ComplexMatrix, Constellation, SeededRng};
use gcmb::pstbc::{group_exhaustive_ml, pcmb_decode, pcmb_group, pstbc_encode, PerfectCodeSpec};
use gcmb::Result;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { passed, detail: detail.into() })
}

fn generator_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/g4_vandermonde_real.txt")
}

fn within(elapsed: Duration, limit: f64) -> bool {
    elapsed.as_secs_f64() < limit
}

fn encoder_equivalence() -> Result<Outcome> {
    let t = Instant::now();
    let gap = encoder_equivalence_gap();
    let el = t.elapsed();
    outcome(gap <= 1e-14 && within(el, 1.0), format!("max entry gap {gap:.2e} over 256 inputs in {el:.2?}"))
}

fn r_realness() -> Result<Outcome> {
    let t = Instant::now();
    let m = max_imag_r(100_000, 17)?;
    let el = t.elapsed();
    outcome(m <= 1e-10 && within(el, 10.0), format!("max |Im R| = {m:.2e} over 1e5 channels in {el:.2?}"))
}

fn oracle_agreement() -> Result<Outcome> {
    let t = Instant::now();
    let r = shared_observation_agreement(4, 8.0, 10_000, 23)?;
    let el = t.elapsed();
    outcome(
        r.mismatches == 0 && within(el, 60.0),
        format!("{} mismatches in {} trials at 8 dB, max metric gap {:.1e}, {el:.2?}", r.mismatches, r.trials, r.max_metric_gap),
    )
}

fn gcmb_complexity() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut ok = true;
    for m in [4, 16, 64] {
        // 4 real subsystems per codeword: 4 SNR points x 62 500 trials = 1e6 decodes.
        let mut cfg = SimConfig::new(Scheme::Gcmb, m, vec![0.0, 10.0, 20.0, 30.0], 62_500, 31 + m as u64);
        cfg.target_errors = None;
        let r = complexity_report(&cfg)?;
        ok &= r.violations == 0 && r.subsystem_decodes >= 1_000_000;
        parts.push(format!("M={m}: max {} <= {} ({} decodes)", r.max_nodes, r.bound, r.subsystem_decodes));
    }
    outcome(ok, parts.join("; "))
}

fn rotated_rows(spec: &PerfectCodeSpec) -> Result<PerfectCodeSpec> {
    let phases: Vec<Complex64> = [0.3, -1.1, 2.0, 0.7].iter().map(|&a| Complex64::from_polar(1.0, a)).collect();
    let g = ComplexMatrix::from_fn(4, 4, |r, c| phases[r] * spec.g()[(r, c)]);
    PerfectCodeSpec::new(4, g, spec.phase())
}

fn pcmb_complexity() -> Result<Outcome> {
    let file = PerfectCodeSpec::load(generator_path())?;
    let rotated = rotated_rows(&file)?;
    let mut parts = Vec::new();
    let mut ok = true;
    for m in [4, 16] {
        let mut cfg = SimConfig::new(Scheme::Pcmb, m, vec![0.0, 10.0, 20.0, 30.0], 5_000, 41 + m as u64);
        cfg.dim = 4;
        cfg.generator = Some(generator_path());
        cfg.target_errors = None;
        let r = complexity_report(&cfg)?;
        ok &= r.violations == 0;
        parts.push(format!("M={m}: max {} <= {} ({} decodes)", r.max_nodes, r.bound, r.subsystem_decodes));
    }

    let c = Constellation::qam(4)?;
    let snr = SnrPoint::new(6.0, 4)?;
    for (name, spec) in [("file", &file), ("row-phased", &rotated)] {
        let mut mismatches = 0;
        let mut max_nodes = 0;
        for t in 0..1_000 {
            let mut rng = SeededRng::child(53, 0, t);
            let sent: Vec<Vec<usize>> = (0..4).map(|_| (0..4).map(|_| rng.index(4)).collect()).collect();
            let chan = sample_channel(4, 4, &mut rng)?;
            let noise = sample_noise(4, Some(&snr), &mut rng)?;
            let xs: Vec<Vec<Complex64>> = sent.iter().map(|g| g.iter().map(|&k| c.point(k)).collect()).collect();
            let x = pstbc_encode(spec, &xs)?;
            let y = x.scale_rows(chan.singular_values()).add(&noise)?;
            let d = pcmb_decode(&y, chan.singular_values(), spec, &c)?;
            max_nodes = max_nodes.max(d.max_nodes());
            for (j, yj) in pcmb_group(&y, 4)?.iter().enumerate() {
                let ml = group_exhaustive_ml(yj, chan.singular_values(), spec, j + 1, &c)?;
                if ml.candidate[..] != d.symbols[4 * j..4 * j + 4] {
                    mismatches += 1;
                }
            }
        }
        ok &= mismatches == 0 && max_nodes <= 8;
        parts.push(format!("{name} G, M=4: {mismatches} group mismatches in 1000 trials, max nodes {max_nodes}"));
    }
    outcome(ok, parts.join("; "))
}

fn grid(start: f64, stop: f64) -> Vec<f64> {
    let n = (stop - start).round() as usize;
    (0..=n).map(|k| start + k as f64).collect()
}

fn ber_curve(scheme: Scheme, seed: u64) -> Result<Vec<BerRecord>> {
    let mut cfg = SimConfig::new(scheme, 4, grid(6.0, 21.0), 1_000_000, seed);
    cfg.target_errors = Some(200);
    run_ber_sweep(&cfg)
}

fn diversity(gcmb: &[BerRecord], elapsed: Duration) -> Result<Outcome> {
    let window: Vec<&BerRecord> = gcmb.iter().filter(|r| r.ber <= 1e-2 && r.ber >= 1e-4).collect();
    let enough = window.iter().all(|r| r.bit_errors >= 200);
    let total: u64 = gcmb.iter().map(|r| r.trials).sum();
    let slope = estimate_diversity_slope(gcmb, (1e-2, 1e-4))?;
    let pts: Vec<String> = window.iter().map(|r| format!("{}dB:{:.2e}", r.snr_db, r.ber)).collect();
    outcome(
        slope >= 3.2 && enough && total <= 10_000_000 && within(elapsed, 600.0),
        format!("slope {slope:.3} (need >= 3.2) from {} points [{}], {total} trials, {elapsed:.1?}", window.len(), pts.join(" ")),
    )
}

fn performance_gap(gcmb: &[BerRecord], ml: &[BerRecord]) -> Result<Outcome> {
    let gap = gap_at_ber(gcmb, ml, 1e-3)?;
    outcome(gap.abs() <= 1.5, format!("GCMB - GC-ML at BER 1e-3: {gap:+.3} dB"))
}

fn pcmb_noiseless() -> Result<Outcome> {
    let mut parts = Vec::new();
    let mut ok = true;
    for m in [4, 16, 64, 256] {
        let mut cfg = SimConfig::new(Scheme::Pcmb, m, vec![0.0], 2_000, 61);
        cfg.dim = 4;
        cfg.generator = Some(generator_path());
        cfg.noiseless = true;
        let r = &run_ber_sweep(&cfg)?[0];
        ok &= r.bit_errors == 0 && r.max_nodes <= (m as f64).sqrt().powi(3) as u64;
        parts.push(format!("M={m}: {} errors in {} codewords", r.bit_errors, r.trials));
    }
    outcome(ok, format!("S=4 noiseless exact recovery: {}", parts.join(", ")))
}

fn simulate_csv(threads: usize, dir: &std::path::Path) -> Result<Vec<u8>> {
    let out = dir.join(format!("run_{threads}.csv"));
    let status = Command::new(env!("CARGO_BIN_EXE_gcmb"))
        .args(["simulate", "--scheme", "gcmb", "--mod", "16", "--snr-start", "0", "--snr-stop", "20"])
        .args(["--snr-step", "5", "--trials", "20000", "--seed", "99", "--threads"])
        .arg(threads.to_string())
        .arg("--out")
        .arg(&out)
        .stderr(std::process::Stdio::null())
        .status()?;
    if !status.success() {
        return Err(gcmb::Error::Io(format!("simulate exited with {status}")));
    }
    Ok(std::fs::read(out)?)
}

fn reproducibility() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let a = simulate_csv(1, dir.path())?;
    let b = simulate_csv(4, dir.path())?;
    let c = simulate_csv(4, dir.path())?;
    outcome(
        a == b && b == c && !a.is_empty(),
        format!("{} bytes; 1 vs 4 threads identical: {}; repeat identical: {}", a.len(), a == b, b == c),
    )
}

fn moments(samples: &[Complex64]) -> (Complex64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<Complex64>() / n;
    let var = samples.iter().map(|z| (z - mean).norm_sqr()).sum::<f64>() / n;
    (mean, var)
}

fn statistics() -> Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();

    let snr = SnrPoint::new(7.0, 2)?;
    let mut rng = SeededRng::new(71);
    let mut noise = Vec::with_capacity(1_000_000);
    while noise.len() < 1_000_000 {
        noise.extend_from_slice(sample_noise(2, Some(&snr), &mut rng)?.as_slice());
    }
    let (mean, var) = moments(&noise);
    let sd = snr.n0.sqrt();
    let rel = (var / snr.n0 - 1.0).abs();
    ok &= mean.norm() <= 0.01 * sd && rel <= 0.02;
    parts.push(format!("noise |mean|/sd {:.1e}, var err {:.2}%", mean.norm() / sd, 100.0 * rel));

    let mut rng = SeededRng::new(72);
    let mut entries = Vec::with_capacity(1_000_000);
    let mut white = [[Complex64::new(0.0, 0.0); 2]; 2];
    let mut group = [0.0; 2];
    let trials = 250_000;
    for _ in 0..trials {
        let ch = sample_channel(2, 2, &mut rng)?;
        entries.extend_from_slice(ch.h.as_slice());
        let n = sample_noise(2, Some(&snr), &mut rng)?;
        let m = ch.factors.u.adjoint().matmul(&n)?;
        for c in 0..2 {
            for (a, row) in white.iter_mut().enumerate() {
                for (b, acc) in row.iter_mut().enumerate() {
                    *acc += m[(a, c)] * m[(b, c)].conj();
                }
            }
        }
        // Group noise after Φ^H and Q^H: (N11, N22) with Φ = diag(1, i).
        let l = ch.singular_values();
        let q = effective_channel(&[l[0], l[1]])?.q;
        let g = [m[(0, 0)], m[(1, 1)] * Complex64::new(0.0, -1.0)];
        let rotated = q.adjoint().mul_vec(&g);
        for (k, z) in rotated.iter().enumerate() {
            group[k] += z.norm_sqr();
        }
    }
    let (mean, var) = moments(&entries);
    ok &= mean.norm() <= 0.01 && (var - 1.0).abs() <= 0.02;
    parts.push(format!("channel |mean| {:.1e}, var {var:.4}", mean.norm()));

    let per = (2 * trials) as f64 * snr.n0;
    let diag_err = (0..2).map(|a| (white[a][a].re / per - 1.0).abs()).fold(0.0, f64::max);
    let off = white[0][1].norm() / per;
    ok &= diag_err <= 0.02 && off <= 0.02;
    parts.push(format!("U^H N var err {:.2}%, cross-corr {:.1e}", 100.0 * diag_err, off));

    let per = trials as f64 * snr.n0;
    let gerr = group.iter().map(|v| (v / per - 1.0).abs()).fold(0.0, f64::max);
    ok &= gerr <= 0.02;
    parts.push(format!("rotated group noise var err {:.2}%", 100.0 * gerr));

    outcome(ok, parts.join("; "))
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |id: u32, name: &str, r: Result<Outcome>| {
        let (passed, detail) = match r {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        failures += u32::from(!passed);
        println!("criterion {id:>2} [{}] {name}: {detail}", if passed { "PASS" } else { "FAIL" });
    };

    report(1, "encoder equivalence", encoder_equivalence());
    report(2, "R realness", r_realness());
    report(3, "decoder equals joint ML", oracle_agreement());
    report(4, "GCMB worst-case nodes", gcmb_complexity());
    report(5, "PCMB S=4 nodes and per-group ML", pcmb_complexity());

    let t = Instant::now();
    let gcmb = ber_curve(Scheme::Gcmb, 81);
    let elapsed = t.elapsed();
    let ml = ber_curve(Scheme::GcMl, 81);
    match (&gcmb, &ml) {
        (Ok(g), Ok(m)) => {
            report(6, "diversity slope", diversity(g, elapsed));
            report(7, "GCMB vs GC-ML gap", performance_gap(g, m));
        }
        _ => {
            let e = gcmb.err().or(ml.err()).expect("one sweep failed");
            report(6, "diversity slope", Err(e.clone()));
            report(7, "GCMB vs GC-ML gap", Err(e));
        }
    }

    report(8, "S=4 substitute", pcmb_noiseless());
    report(9, "reproducible CSV", reproducibility());
    report(10, "generator statistics", statistics());

    if failures == 0 {
        println!("all 10 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failures} criterion/criteria failed");
        ExitCode::FAILURE
    }
}
