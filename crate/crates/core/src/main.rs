use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gcmb::harness::{
    complexity_report, run_ber_sweep_timed, run_validation, snr_grid, write_records, OutputFormat, Scheme, SimConfig,
    ValidationSize, DEFAULT_TARGET_ERRORS,
};
use gcmb::{Error, Result};

/// Golden coded multiple beamforming simulator.
///
/// FPMB (fully precoded multiple beamforming) is not available: its
/// constellation precoder is not part of this package.
#[derive(Debug, Parser)]
#[command(name = "gcmb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a BER sweep and write one record per SNR point.
    Simulate(SimulateArgs),
    /// Run the invariant suite; exits 2 if any check fails.
    Validate {
        /// Smaller trial counts.
        #[arg(long)]
        quick: bool,
    },
    /// Report the distribution of per-subsystem sphere-decoder node counts.
    Complexity(ComplexityArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Gcmb,
    #[value(name = "gc-ml")]
    GcMl,
    Pcmb,
}

impl From<SchemeArg> for Scheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Gcmb => Scheme::Gcmb,
            SchemeArg::GcMl => Scheme::GcMl,
            SchemeArg::Pcmb => Scheme::Pcmb,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_enum)]
    scheme: SchemeArg,
    /// QAM order: 4, 16, 64 or 256.
    #[arg(long = "mod")]
    order: usize,
    /// Code dimension S (2, or 4 for pcmb with --generator).
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Generator file for pcmb with S = 4.
    #[arg(long)]
    generator: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_hyphen_values = true)]
    snr_start: f64,
    #[arg(long, allow_hyphen_values = true)]
    snr_stop: f64,
    #[arg(long)]
    snr_step: f64,
    /// Maximum trials (codewords) per SNR point.
    #[arg(long)]
    trials: u64,
    /// Stop a point once this many bit errors are counted; 0 disables.
    #[arg(long, default_value_t = DEFAULT_TARGET_ERRORS)]
    target_errors: u64,
    /// Transmit without noise (validation).
    #[arg(long)]
    noiseless: bool,
    /// Fill elapsed_seconds (output is then no longer reproducible byte for byte).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Debug, Args)]
struct ComplexityArgs {
    #[command(flatten)]
    common: Common,
    /// Trials per SNR point.
    #[arg(long)]
    trials: u64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    snr_start: f64,
    #[arg(long, default_value_t = 30.0, allow_hyphen_values = true)]
    snr_stop: f64,
    #[arg(long, default_value_t = 10.0)]
    snr_step: f64,
    /// Emit the report as JSON instead of text.
    #[arg(long)]
    json: bool,
}

fn config(common: &Common, snr: Vec<f64>, trials: u64) -> SimConfig {
    let mut cfg = SimConfig::new(common.scheme.into(), common.order, snr, trials, common.seed);
    cfg.dim = common.dim;
    cfg.generator = common.generator.clone();
    cfg
}

fn set_threads(n: Option<usize>) -> Result<()> {
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot configure {n} threads: {e}")))?;
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    set_threads(args.common.threads)?;
    let snr = snr_grid(args.snr_start, args.snr_stop, args.snr_step)?;
    let mut cfg = config(&args.common, snr, args.trials);
    cfg.target_errors = (args.target_errors > 0).then_some(args.target_errors);
    cfg.noiseless = args.noiseless;
    cfg.validate()?;
    let records = run_ber_sweep_timed(&cfg, args.timing)?;
    let format = match args.format {
        FormatArg::Csv => OutputFormat::Csv,
        FormatArg::Json => OutputFormat::JsonLines,
    };
    let file = File::create(&args.out).map_err(|e| Error::Io(format!("{}: {e}", args.out.display())))?;
    let mut w = BufWriter::new(file);
    write_records(&records, format, &mut w)?;
    w.flush()?;
    for r in &records {
        eprintln!(
            "{} M={} {:>6.2} dB  trials={:<9} errors={:<7} ber={:.3e}  max_nodes={}",
            r.scheme, r.m, r.snr_db, r.trials, r.bit_errors, r.ber, r.max_nodes
        );
    }
    Ok(())
}

fn complexity(args: ComplexityArgs) -> Result<()> {
    set_threads(args.common.threads)?;
    let snr = snr_grid(args.snr_start, args.snr_stop, args.snr_step)?;
    let mut cfg = config(&args.common, snr, args.trials);
    cfg.target_errors = None;
    let report = complexity_report(&cfg)?;
    let mut out = io::stdout().lock();
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("report serialises"))?;
    } else {
        writeln!(out, "scheme {}  M={}  S={}", report.scheme, report.m, report.dim)?;
        writeln!(out, "trials {}  subsystem decodes {}", report.trials, report.subsystem_decodes)?;
        writeln!(out, "max nodes {}  mean nodes {:.4}  bound {}", report.max_nodes, report.mean_nodes, report.bound)?;
        writeln!(out, "violations {}", report.violations)?;
        writeln!(out, "histogram (nodes: count)")?;
        for (nodes, count) in &report.histogram {
            writeln!(out, "  {nodes:>6}: {count}")?;
        }
    }
    if report.violations > 0 {
        return Err(Error::InsufficientData(format!("{} decodes exceeded the node bound", report.violations)));
    }
    Ok(())
}

fn validate(quick: bool) -> ExitCode {
    let size = if quick { ValidationSize::quick() } else { ValidationSize::full() };
    let results = run_validation(size);
    let mut failed = 0;
    for r in &results {
        println!("[{}] {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        failed += usize::from(!r.passed);
    }
    if failed > 0 {
        println!("{failed} check(s) failed");
        ExitCode::from(2)
    } else {
        println!("all {} checks passed", results.len());
        ExitCode::SUCCESS
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Complexity(args) => complexity(args),
        Command::Validate { quick } => return validate(quick),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
