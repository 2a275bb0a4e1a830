//! The desk-scale experiments: each consumes a flat config, runs a seeded
//! optimization, and leaves its artifacts (traces, clouds, images, diagrams,
//! plots) in the output directory.

pub mod circle;
pub mod diagram_cmd;
pub mod filter;
pub mod image;
pub mod pointcloud;
pub mod regression;

use std::path::Path;

use persopt_core::{trace_to_csv, window_range, StopRule, TraceRow};

use crate::error::CliError;
use crate::io::write_string;
use crate::plot::line_plot;

pub(crate) fn ensure_dir(path: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Write `<name>.csv` and `<name>.svg` for a loss trace.
pub(crate) fn emit_trace(out: &Path, name: &str, trace: &[TraceRow]) -> Result<(), CliError> {
    write_string(&out.join(format!("{name}.csv")), &trace_to_csv(trace))?;
    let series: Vec<(f64, f64)> = trace.iter().map(|r| (r.step as f64, r.loss)).collect();
    write_string(&out.join(format!("{name}.svg")), &line_plot(&series, name))
}

/// Whether the final window of the trace satisfies the stop tolerance.
pub(crate) fn window_satisfied(trace: &[TraceRow], stop: &StopRule) -> bool {
    window_range(trace, stop.loss_window).is_some_and(|r| r < stop.tol)
}
