//! Deterministic CSV output and one-line summaries.
//!
//! The CSV layout is versioned in the leading `#` comment; identical config
//! and seed produce byte-identical files, so wall time stays out of the file
//! and is reported only on the summary line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};

use crate::scenarios::ExperimentOutcome;

pub const CSV_VERSION: &str = "evoprop-results v1";

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(outcome: &ExperimentOutcome, path: &Path) -> Result<()> {
    let file = File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "# {CSV_VERSION}")?;
    writeln!(w, "# scenario={} seed={}", outcome.scenario, outcome.seed)?;
    writeln!(
        w,
        "# columns: level,error_vs_oracle,error_vs_closed_form,successive_difference,norm_drift"
    )?;
    for row in &outcome.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            row.level,
            fmt(row.error_vs_oracle),
            fmt(row.error_vs_closed_form),
            fmt(row.successive_difference),
            fmt(row.norm_drift),
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn summary_line(outcome: &ExperimentOutcome, csv_path: &Path) -> String {
    let order = outcome
        .fitted_order
        .map(|o| format!("{o:.4}"))
        .unwrap_or_else(|| "n/a".into());
    format!(
        "{}: {} | order {} | {} | rows {} | {:.1} ms | {}",
        outcome.scenario,
        if outcome.pass { "PASS" } else { "FAIL" },
        order,
        outcome.note,
        outcome.rows.len(),
        outcome.wall_ms,
        csv_path.display(),
    )
}
