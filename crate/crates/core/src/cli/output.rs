//! CSV and JSON encodings.
//!
//! CSV files start with a header row and print reals with 17 significant
//! digits, which round-trips every `f64`.

use std::path::Path;

use serde_json::json;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::trajectory::TrajectoryBatch;

pub const SCHEMA_VERSION: u32 = 1;

pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn json_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

pub fn to_json(v: &serde_json::Value) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(json_err)?;
    s.push('\n');
    Ok(s)
}

/// `replication,t,value`, one line per replication and grid point.
pub fn batch_csv(batch: &TrajectoryBatch) -> String {
    let times: Vec<String> = batch.grid.iter().map(|&t| fmt_real(t)).collect();
    let mut s = String::with_capacity(48 * batch.values.len() + 24);
    s.push_str("replication,t,value\n");
    for (r, row) in batch.rows().enumerate() {
        for (t, &v) in times.iter().zip(row) {
            s.push_str(&format!("{r},{t},{}\n", fmt_real(v)));
        }
    }
    s
}

pub fn batch_json(command: &str, cfg: &ExperimentConfig, batch: &TrajectoryBatch) -> Result<String> {
    let rows: Vec<&[f64]> = batch.rows().collect();
    to_json(&json!({
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "kind": batch.kind,
        "model": cfg.model,
        "run": cfg.run,
        "scaling": batch.scaling,
        "seed": batch.seed,
        "replications": batch.replications,
        "grid": batch.grid,
        "values": rows,
    }))
}

/// Reads the `value` column of a CSV. With a `t` column, keeps rows at time
/// `at`, or at the largest time present when `at` is `None`.
pub fn read_values(path: &Path, at: Option<f64>) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?
        .split(',')
        .map(str::trim)
        .collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let v_col = col("value").ok_or_else(|| Error::Parse(format!("{}: no `value` column", path.display())))?;
    let t_col = col("t");
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |c: usize| -> Result<f64> {
            fields
                .get(c)
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| Error::Parse(format!("{}: bad row {}", path.display(), i + 2)))
        };
        let t = match t_col {
            Some(c) => get(c)?,
            None => 0.0,
        };
        rows.push((t, get(v_col)?));
    }
    if t_col.is_none() {
        return Ok(rows.into_iter().map(|(_, v)| v).collect());
    }
    let target = match at {
        Some(t) => t,
        None => rows.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max),
    };
    let tol = 1e-9 * target.abs().max(1.0);
    let picked: Vec<f64> = rows
        .into_iter()
        .filter(|(t, _)| (t - target).abs() <= tol)
        .map(|(_, v)| v)
        .collect();
    if picked.is_empty() {
        return Err(Error::invalid(format!("{}: no rows at t = {target}", path.display())));
    }
    Ok(picked)
}
