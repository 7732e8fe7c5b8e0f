//! CSV tables, plot series and JSON record dumps.
//!
//! Floats are written in Rust's shortest round-trip form, so rerunning the same
//! configuration reproduces the files byte for byte.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{BenchError, Result};
use crate::runner::RunRecord;

/// Marks an iteration count that was not reached within the iteration cap.
pub const NOT_CONVERGED: &str = "-";

pub const CSV_COLUMNS: [&str; 14] = [
    "m",
    "n",
    "r",
    "nnz_ratio",
    "q_ratio",
    "transform",
    "q_over_dof",
    "relL_ladmm",
    "relS_ladmm",
    "iter1",
    "relL_iladmm",
    "relS_iladmm",
    "iter2",
    "ratio",
];

pub const PLOT_COLUMNS: [&str; 9] = [
    "solver",
    "m",
    "n",
    "r",
    "nnz_ratio",
    "q_ratio",
    "transform",
    "alpha",
    "mean_iters",
];

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| NOT_CONVERGED.to_string(), |x| x.to_string())
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    let file = fs::File::create(path).map_err(|e| BenchError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

/// One row per record.
pub fn emit_csv(records: &[RunRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(BenchError::Empty);
    }
    let mut w = writer(path)?;
    w.write_record(CSV_COLUMNS)?;
    for r in records {
        let a = &r.aggregate;
        let c = &r.cell;
        w.write_record([
            c.m.to_string(),
            c.n.to_string(),
            c.r.to_string(),
            c.nnz_ratio.to_string(),
            c.q_ratio.to_string(),
            c.kind.to_string(),
            r.q_over_dof.to_string(),
            format!("{:e}", a.rel_l_ladmm),
            format!("{:e}", a.rel_s_ladmm),
            opt(a.iter1),
            format!("{:e}", a.rel_l_iladmm),
            format!("{:e}", a.rel_s_iladmm),
            opt(a.iter2),
            opt(a.ratio),
        ])?;
    }
    w.flush().map_err(|e| BenchError::io(path, e))?;
    Ok(())
}

/// Mean iterations against the configuration, one row per solver and record. LADMM rows carry
/// `alpha = 0`.
pub fn emit_plot_data(records: &[RunRecord], path: &Path) -> Result<()> {
    if records.is_empty() {
        return Err(BenchError::Empty);
    }
    let mut w = writer(path)?;
    w.write_record(PLOT_COLUMNS)?;
    for r in records {
        let c = &r.cell;
        for (solver, alpha, iters) in [
            ("ladmm", 0.0, r.aggregate.iter1),
            ("iladmm", r.alpha, r.aggregate.iter2),
        ] {
            w.write_record([
                solver.to_string(),
                c.m.to_string(),
                c.n.to_string(),
                c.r.to_string(),
                c.nnz_ratio.to_string(),
                c.q_ratio.to_string(),
                c.kind.to_string(),
                alpha.to_string(),
                opt(iters),
            ])?;
        }
    }
    w.flush().map_err(|e| BenchError::io(path, e))?;
    Ok(())
}

pub fn emit_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))?;
    }
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").map_err(|e| BenchError::io(path, e))
}
