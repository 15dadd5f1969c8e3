//! The `concentration` subcommand.

use std::path::Path;

use heavyclip::concentration::{run_coverage, CoverageLemma, CoverageReport};

use crate::error::{HarnessError, Result};
use crate::output::{ensure_dir, fmt_f64};

pub const COVERAGE_HEADER: [&str; 7] = ["lemma", "delta", "trials", "coverage", "ci_low", "ci_high", "pass"];

#[derive(Debug, Clone)]
pub struct CoverageRow {
    pub lemma: CoverageLemma,
    pub delta: f64,
    pub report: CoverageReport,
}

/// Runs every built-in coverage experiment at each `δ` and writes
/// `concentration.csv` into `out`.
pub fn concentration(deltas: &[f64], trials: usize, seed: u64, out: &Path) -> Result<Vec<CoverageRow>> {
    if deltas.is_empty() {
        return Err(HarnessError::config("delta", "at least one value required"));
    }
    let mut rows = Vec::new();
    for &delta in deltas {
        for lemma in CoverageLemma::ALL {
            let report = run_coverage(lemma, delta, trials, seed).map_err(|e| match e {
                heavyclip::Error::InvalidParameter { name, reason } => HarnessError::config(name, reason),
                other => HarnessError::Core(other),
            })?;
            rows.push(CoverageRow { lemma, delta, report });
        }
    }
    ensure_dir(out)?;
    let mut w = csv::Writer::from_path(out.join("concentration.csv"))?;
    w.write_record(COVERAGE_HEADER)?;
    for r in &rows {
        w.write_record([
            r.lemma.name().to_string(),
            r.delta.to_string(),
            r.report.trials.to_string(),
            fmt_f64(r.report.coverage),
            fmt_f64(r.report.ci_low),
            fmt_f64(r.report.ci_high),
            r.report.pass.to_string(),
        ])?;
    }
    w.flush().map_err(|e| HarnessError::Output(e.to_string()))?;
    Ok(rows)
}
