//! Monte Carlo experiments: BER sweeps, curve analysis, node-count reports and
//! the validation suite.
//!
//! Every trial draws from its own random stream keyed by `(seed, SNR index,
//! trial index)` and only integer counts are aggregated, so a run is
//! reproducible bit for bit whatever the number of worker threads.

mod analysis;
mod config;
mod output;
mod sweep;
mod validate;

pub use analysis::{estimate_diversity_slope, gap_at_ber, snr_at_ber};
pub use config::{snr_grid, Scheme, SimConfig, DEFAULT_TARGET_ERRORS};
pub use output::{write_csv, write_json_lines, write_records, OutputFormat, CSV_HEADER};
pub use sweep::{
    complexity_report, node_bound, run_ber_sweep, run_ber_sweep_timed, shared_observation_agreement,
    AgreementReport, BerRecord, ComplexityReport,
};
pub use validate::{encoder_equivalence_gap, max_imag_r, run_validation, CheckResult, ValidationSize};
