//! CSV output of a sweep. Each file starts with a versioned `#` line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::RunResult;
use crate::error::{MintError, Result};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const TRACE_FILE: &str = "trace.csv";
pub const RANGING_CDF_FILE: &str = "ranging_cdf.csv";

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

fn open(dir: &Path, name: &str, version_line: &str) -> Result<csv::Writer<BufWriter<File>>> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| MintError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{version_line}").map_err(|e| MintError::io(&path, e))?;
    Ok(csv::Writer::from_writer(w))
}

/// Writes `summary.csv`, `trace.csv` and `ranging_cdf.csv` into `dir`.
pub fn write_reports(dir: &Path, results: &[RunResult]) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| MintError::io(dir, e))?;

    let mut summary = open(dir, SUMMARY_FILE, "# mint-summary v1")?;
    summary.write_record([
        "tracker",
        "pulse_ns",
        "obstruction",
        "rms_error_m",
        "mean_hdop",
        "mean_associated",
        "positions",
    ])?;
    let mut trace = open(dir, TRACE_FILE, "# mint-trace v1")?;
    trace.write_record([
        "tracker",
        "pulse_ns",
        "obstruction",
        "index",
        "true_x",
        "true_y",
        "est_x",
        "est_y",
        "error_m",
        "hdop",
        "associated",
    ])?;
    let mut cdf = open(dir, RANGING_CDF_FILE, "# mint-ranging-cdf v1")?;
    cdf.write_record(["tracker", "pulse_ns", "obstruction", "abs_error_m", "cdf"])?;

    for r in results {
        let tracker = r.tracker.name();
        let pulse = (r.pulse * 1e9).to_string();
        let obstruction = if r.obstructed { "on" } else { "off" };
        let m = &r.metrics;
        summary.write_record([
            tracker.to_string(),
            pulse.clone(),
            obstruction.to_string(),
            m.rms_error.to_string(),
            opt(m.mean_hdop),
            m.mean_associated.to_string(),
            m.positions.len().to_string(),
        ])?;
        for p in &m.positions {
            let assoc = p.associated.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";");
            trace.write_record([
                tracker.to_string(),
                pulse.clone(),
                obstruction.to_string(),
                p.index.to_string(),
                p.truth.x.to_string(),
                p.truth.y.to_string(),
                p.estimate.x.to_string(),
                p.estimate.y.to_string(),
                p.error.to_string(),
                opt(p.hdop),
                assoc,
            ])?;
        }
        for &(g, c) in &m.ranging_cdf {
            cdf.write_record([
                tracker.to_string(),
                pulse.clone(),
                obstruction.to_string(),
                g.to_string(),
                c.to_string(),
            ])?;
        }
    }
    for w in [&mut summary, &mut trace, &mut cdf] {
        w.flush().map_err(|e| MintError::io(dir, e))?;
    }
    Ok(())
}
