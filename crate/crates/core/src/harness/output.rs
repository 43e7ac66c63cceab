use std::io::Write;

use super::sweep::BerRecord;
use crate::error::Result;

pub const CSV_HEADER: &str = "scheme,M,snr_db,trials,bit_errors,ber,max_nodes,mean_nodes,elapsed_seconds,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    JsonLines,
}

/// CSV with the fixed header; an unrecorded elapsed time is left empty.
pub fn write_csv(records: &[BerRecord], mut w: impl Write) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let elapsed = r.elapsed_seconds.map(|e| e.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.scheme, r.m, r.snr_db, r.trials, r.bit_errors, r.ber, r.max_nodes, r.mean_nodes, elapsed, r.seed
        )?;
    }
    Ok(())
}

/// One JSON object per record and line.
pub fn write_json_lines(records: &[BerRecord], mut w: impl Write) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r).expect("records serialise");
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_records(records: &[BerRecord], format: OutputFormat, w: impl Write) -> Result<()> {
    match format {
        OutputFormat::Csv => write_csv(records, w),
        OutputFormat::JsonLines => write_json_lines(records, w),
    }
}
