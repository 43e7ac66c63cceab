use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Scheme, SimConfig};
use crate::channel::{beamformed_observation, plain_observation, sample_channel, sample_noise, SnrPoint};
use crate::error::{Error, Result};
use crate::golden::{gcmb_decode, golden_encode, Codebook, SymbolPair};
use crate::numerics::{Complex64, ComplexMatrix, Constellation, SeededRng};
use crate::pstbc::{pcmb_decode, pstbc_encode, PerfectCodeSpec};

/// Trials are generated and decoded in parallel batches of this size; the
/// early-stop scan over a batch is sequential, so results do not depend on
/// the thread count.
const BATCH: u64 = 4096;

/// One row of a BER curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerRecord {
    pub scheme: Scheme,
    #[serde(rename = "M")]
    pub m: usize,
    pub snr_db: f64,
    pub trials: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub max_nodes: u64,
    pub mean_nodes: f64,
    /// Wall-clock time of the point; only recorded on request since it
    /// breaks byte-for-byte reproducibility of output files.
    pub elapsed_seconds: Option<f64>,
    pub seed: u64,
}

/// Per-trial result.
#[derive(Debug, Clone, Default)]
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct TrialOutcome {
    pub bit_errors: u64,
    /// Node count of each subsystem decode in this trial.
    pub nodes: Vec<u64>,
    pub sent: Vec<usize>,
    pub decided: Vec<usize>,
}

/// Totals over the trials of one SNR point.
#[derive(Debug, Clone, Default)]
pub(crate) struct PointStats {
    pub trials: u64,
    pub bit_errors: u64,
    pub max_nodes: u64,
    pub node_sum: u64,
    pub decodes: u64,
    pub histogram: BTreeMap<u64, u64>,
}

impl PointStats {
    fn add(&mut self, o: &TrialOutcome) {
        self.trials += 1;
        self.bit_errors += o.bit_errors;
        for &n in &o.nodes {
            self.max_nodes = self.max_nodes.max(n);
            self.node_sum += n;
            self.decodes += 1;
            *self.histogram.entry(n).or_insert(0) += 1;
        }
    }

    pub fn mean_nodes(&self) -> f64 {
        if self.decodes == 0 {
            0.0
        } else {
            self.node_sum as f64 / self.decodes as f64
        }
    }
}

/// Read-only state shared by all trials of a run.
pub(crate) struct Engine {
    pub cfg: SimConfig,
    pub constellation: Constellation,
    codebook: Option<Codebook>,
    spec: Option<PerfectCodeSpec>,
}

impl Engine {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let constellation = Constellation::qam(cfg.order)?;
        let codebook = match cfg.scheme {
            Scheme::GcMl => Some(Codebook::new(&constellation)?),
            _ => None,
        };
        let spec = match (cfg.scheme, cfg.dim, &cfg.generator) {
            (Scheme::Pcmb, 2, None) => Some(PerfectCodeSpec::golden()),
            (Scheme::Pcmb, _, Some(path)) => {
                let spec = PerfectCodeSpec::load(path)?;
                if spec.dim() != cfg.dim {
                    return Err(Error::Config(format!(
                        "generator file has S = {} but --dim is {}",
                        spec.dim(),
                        cfg.dim
                    )));
                }
                Some(spec)
            }
            (Scheme::Pcmb, d, None) => {
                return Err(Error::Config(format!("pcmb with dimension {d} needs a generator file")))
            }
            _ => None,
        };
        Ok(Self {
            cfg: cfg.clone(),
            constellation,
            codebook,
            spec,
        })
    }

    fn snr(&self, snr_db: f64) -> Result<Option<SnrPoint>> {
        if self.cfg.noiseless {
            Ok(None)
        } else {
            SnrPoint::new(snr_db, self.cfg.dim).map(Some)
        }
    }

    /// Draws symbols, channel and noise from the trial's own stream (always
    /// in that order, whatever the scheme) and decodes.
    pub fn trial(&self, snr_index: usize, trial: u64, snr: Option<&SnrPoint>) -> Result<TrialOutcome> {
        let c = &self.constellation;
        let s = self.cfg.dim;
        let mut rng = SeededRng::child(self.cfg.seed, snr_index as u64, trial);
        let sent: Vec<usize> = (0..s * s).map(|_| rng.index(c.order())).collect();
        let chan = sample_channel(s, s, &mut rng)?;
        let noise = sample_noise(s, snr, &mut rng)?;

        let (decided, nodes) = match self.cfg.scheme {
            Scheme::Gcmb => {
                let x = golden_encode(&SymbolPair::from_indices(c, &[sent[0], sent[1], sent[2], sent[3]]));
                let y = beamformed_observation(&x, &chan, &noise)?;
                let l = chan.singular_values();
                let d = gcmb_decode(&y, &[l[0], l[1]], c)?;
                let nodes = d.subsystem_stats.iter().map(|st| st.nodes_visited).collect();
                (d.symbols, nodes)
            }
            Scheme::GcMl => {
                let book = self.codebook.as_ref().expect("codebook built for gc-ml");
                let x = golden_encode(&SymbolPair::from_indices(c, &[sent[0], sent[1], sent[2], sent[3]]));
                let y = plain_observation(&x, &chan.h, &noise)?;
                let (n, _) = book.ml_decode(&y, &chan.h)?;
                (book.indices(n).to_vec(), vec![book.len() as u64])
            }
            Scheme::Pcmb => {
                let spec = self.spec.as_ref().expect("generator loaded for pcmb");
                let xs: Vec<Vec<Complex64>> = sent.chunks(s).map(|g| g.iter().map(|&k| c.point(k)).collect()).collect();
                let x = pstbc_encode(spec, &xs)?;
                let y = beamformed_observation(&x, &chan, &noise)?;
                let d = pcmb_decode(&y, chan.singular_values(), spec, c)?;
                let nodes = d.subsystem_stats.iter().map(|st| st.nodes_visited).collect();
                (d.symbols, nodes)
            }
        };
        let bit_errors = sent
            .iter()
            .zip(&decided)
            .map(|(&a, &b)| u64::from(c.bit_errors(a, b)))
            .sum();
        Ok(TrialOutcome {
            bit_errors,
            nodes,
            sent,
            decided,
        })
    }

    /// Runs one SNR point, stopping early when the target error count is hit.
    pub fn run_point(&self, snr_index: usize, target_errors: Option<u64>) -> Result<PointStats> {
        let snr = self.snr(self.cfg.snr_db[snr_index])?;
        let mut stats = PointStats::default();
        let mut start = 0;
        'batches: while start < self.cfg.trials {
            let end = (start + BATCH).min(self.cfg.trials);
            let outcomes = (start..end)
                .into_par_iter()
                .map(|t| self.trial(snr_index, t, snr.as_ref()))
                .collect::<Result<Vec<_>>>()?;
            for o in &outcomes {
                stats.add(o);
                if target_errors.is_some_and(|t| t > 0 && stats.bit_errors >= t) {
                    break 'batches;
                }
            }
            start = end;
        }
        Ok(stats)
    }
}

/// One record per SNR point.
pub fn run_ber_sweep(cfg: &SimConfig) -> Result<Vec<BerRecord>> {
    run_ber_sweep_timed(cfg, false)
}

/// As [`run_ber_sweep`], optionally filling `elapsed_seconds`.
pub fn run_ber_sweep_timed(cfg: &SimConfig, record_timing: bool) -> Result<Vec<BerRecord>> {
    let engine = Engine::new(cfg)?;
    let bits = cfg.bits_per_codeword();
    let mut out = Vec::with_capacity(cfg.snr_db.len());
    for (i, &snr_db) in cfg.snr_db.iter().enumerate() {
        let started = Instant::now();
        let p = engine.run_point(i, cfg.target_errors)?;
        out.push(BerRecord {
            scheme: cfg.scheme,
            m: cfg.order,
            snr_db,
            trials: p.trials,
            bit_errors: p.bit_errors,
            ber: p.bit_errors as f64 / (p.trials * bits) as f64,
            max_nodes: p.max_nodes,
            mean_nodes: p.mean_nodes(),
            elapsed_seconds: record_timing.then(|| started.elapsed().as_secs_f64()),
            seed: cfg.seed,
        });
    }
    Ok(out)
}

/// Distribution of per-subsystem node counts over a whole run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexityReport {
    pub scheme: Scheme,
    #[serde(rename = "M")]
    pub m: usize,
    pub dim: usize,
    pub trials: u64,
    pub subsystem_decodes: u64,
    pub max_nodes: u64,
    pub mean_nodes: f64,
    /// Worst case the scheme is expected to respect.
    pub bound: u64,
    pub violations: u64,
    /// Node count → number of subsystem decodes.
    pub histogram: BTreeMap<u64, u64>,
}

/// Worst-case node budget per subsystem decode: `√M^(S−1)` for the
/// beamformed schemes (one real layer rounded), `M⁴` for exhaustive search.
pub fn node_bound(scheme: Scheme, order: usize, dim: usize) -> u64 {
    let side = (order as f64).sqrt().round() as u64;
    match scheme {
        Scheme::Gcmb | Scheme::Pcmb => side.pow(dim as u32 - 1),
        Scheme::GcMl => (order as u64).pow(4),
    }
}

/// Node-count statistics over every trial of every SNR point (no early stop).
pub fn complexity_report(cfg: &SimConfig) -> Result<ComplexityReport> {
    let engine = Engine::new(cfg)?;
    let bound = node_bound(cfg.scheme, cfg.order, cfg.dim);
    let mut total = PointStats::default();
    for i in 0..cfg.snr_db.len() {
        let p = engine.run_point(i, None)?;
        total.trials += p.trials;
        total.max_nodes = total.max_nodes.max(p.max_nodes);
        total.node_sum += p.node_sum;
        total.decodes += p.decodes;
        for (k, v) in p.histogram {
            *total.histogram.entry(k).or_insert(0) += v;
        }
    }
    let violations = total.histogram.range(bound + 1..).map(|(_, v)| v).sum();
    Ok(ComplexityReport {
        scheme: cfg.scheme,
        m: cfg.order,
        dim: cfg.dim,
        trials: total.trials,
        subsystem_decodes: total.decodes,
        max_nodes: total.max_nodes,
        mean_nodes: total.mean_nodes(),
        bound,
        violations,
        histogram: total.histogram,
    })
}

/// Outcome of decoding the same beamformed observations two ways.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub trials: u64,
    pub mismatches: u64,
    /// Largest |metric difference| between the two decisions.
    pub max_metric_gap: f64,
}

/// Feeds each `Y = ΛX + N` to both the decoupled decoder and a joint
/// exhaustive search over all `M⁴` codewords with channel `Λ`, and counts
/// disagreements.
pub fn shared_observation_agreement(order: usize, snr_db: f64, trials: u64, seed: u64) -> Result<AgreementReport> {
    let c = Constellation::qam(order)?;
    let book = Codebook::new(&c)?;
    let snr = SnrPoint::new(snr_db, 2)?;
    let results = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<(bool, f64)> {
            let mut rng = SeededRng::child(seed, 0, t);
            let sent: Vec<usize> = (0..4).map(|_| rng.index(c.order())).collect();
            let chan = sample_channel(2, 2, &mut rng)?;
            let noise = sample_noise(2, Some(&snr), &mut rng)?;
            let x = golden_encode(&SymbolPair::from_indices(&c, &[sent[0], sent[1], sent[2], sent[3]]));
            let y = beamformed_observation(&x, &chan, &noise)?;
            let l = chan.singular_values();
            let d = gcmb_decode(&y, &[l[0], l[1]], &c)?;
            let lam = ComplexMatrix::from_real_diag(l);
            let (n, metric) = book.ml_decode(&y, &lam)?;
            Ok((d.symbols != book.indices(n), (d.metric - metric).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AgreementReport {
        trials,
        mismatches: results.iter().filter(|r| r.0).count() as u64,
        max_metric_gap: results.iter().map(|r| r.1).fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_runs_are_error_free() {
        for scheme in [Scheme::Gcmb, Scheme::GcMl, Scheme::Pcmb] {
            let mut cfg = SimConfig::new(scheme, 4, vec![0.0, 10.0], 500, 3);
            cfg.noiseless = true;
            for r in run_ber_sweep(&cfg).unwrap() {
                assert_eq!(r.bit_errors, 0);
                assert_eq!(r.ber, 0.0);
                assert_eq!(r.trials, 500);
            }
        }
    }

    #[test]
    fn early_stop_is_exact() {
        let mut cfg = SimConfig::new(Scheme::Gcmb, 16, vec![0.0], 100_000, 9);
        cfg.target_errors = Some(50);
        let r = &run_ber_sweep(&cfg).unwrap()[0];
        assert!(r.bit_errors >= 50);
        assert!(r.trials < 100_000);
        // The last trial is the one that crossed the target.
        let mut shorter = cfg.clone();
        shorter.trials = r.trials - 1;
        shorter.target_errors = None;
        let s = &run_ber_sweep(&shorter).unwrap()[0];
        assert!(s.bit_errors < 50);
    }

    #[test]
    fn records_are_consistent() {
        let cfg = SimConfig::new(Scheme::Gcmb, 4, vec![0.0, 6.0, 12.0], 3000, 5);
        for r in run_ber_sweep(&cfg).unwrap() {
            assert!(r.bit_errors <= r.trials * 8);
            assert_eq!(r.ber, r.bit_errors as f64 / (r.trials * 8) as f64);
            assert!(r.max_nodes as f64 >= r.mean_nodes);
            assert!(r.max_nodes <= 2);
            assert_eq!(r.elapsed_seconds, None);
        }
    }

    #[test]
    fn gcmb_and_pcmb_dimension_two_coincide() {
        let a = run_ber_sweep(&SimConfig::new(Scheme::Gcmb, 16, vec![5.0], 2000, 8)).unwrap();
        let b = run_ber_sweep(&SimConfig::new(Scheme::Pcmb, 16, vec![5.0], 2000, 8)).unwrap();
        assert_eq!(a[0].bit_errors, b[0].bit_errors);
        assert_eq!(a[0].trials, b[0].trials);
    }

    #[test]
    fn shared_streams_feed_both_schemes() {
        let mut g = SimConfig::new(Scheme::Gcmb, 4, vec![8.0], 50, 12);
        g.target_errors = None;
        let mut m = g.clone();
        m.scheme = Scheme::GcMl;
        let eg = Engine::new(&g).unwrap();
        let em = Engine::new(&m).unwrap();
        let snr = SnrPoint::new(8.0, 2).unwrap();
        for t in 0..50 {
            let a = eg.trial(0, t, Some(&snr)).unwrap();
            let b = em.trial(0, t, Some(&snr)).unwrap();
            assert_eq!(a.sent, b.sent);
            assert_eq!(b.nodes, vec![256]);
            assert_eq!(a.sent.len(), a.decided.len());
        }
    }

    #[test]
    fn complexity_counts_every_subsystem() {
        let mut cfg = SimConfig::new(Scheme::Gcmb, 64, vec![0.0, 20.0], 1000, 2);
        cfg.target_errors = None;
        let r = complexity_report(&cfg).unwrap();
        assert_eq!(r.subsystem_decodes, 2 * 1000 * 4);
        assert_eq!(r.histogram.values().sum::<u64>(), r.subsystem_decodes);
        assert_eq!(r.bound, 8);
        assert_eq!(r.violations, 0);
        assert!(r.max_nodes <= 8);
    }

    #[test]
    fn node_bounds() {
        assert_eq!(node_bound(Scheme::Gcmb, 16, 2), 4);
        assert_eq!(node_bound(Scheme::Pcmb, 4, 4), 8);
        assert_eq!(node_bound(Scheme::Pcmb, 16, 4), 64);
        assert_eq!(node_bound(Scheme::GcMl, 4, 2), 256);
    }
}
