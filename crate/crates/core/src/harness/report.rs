use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ExperimentConfig;
use crate::error::{Error, Result};

/// Two-sided 95% normal quantile.
pub const WILSON_Z: f64 = 1.959_963_984_540_054;

/// Wilson score interval for `k` successes in `n` trials; `(0, 1)` when `n = 0`.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub index: usize,
    pub n: usize,
    pub params: BTreeMap<String, Value>,
    pub replications: usize,
    pub completed: usize,
    pub failures: usize,
    pub rejections: usize,
    /// `rejections / completed`.
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_p_value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
    /// First few failure messages.
    #[serde(default)]
    pub failure_messages: Vec<String>,
    /// P-values of the completed replications, in replication order.
    pub p_values: Vec<f64>,
}

impl CellReport {
    pub(crate) fn from_p_values(
        index: usize,
        n: usize,
        params: BTreeMap<String, Value>,
        replications: usize,
        p_values: Vec<f64>,
        alpha: f64,
        failure_messages: Vec<String>,
    ) -> Self {
        let completed = p_values.len();
        let rejections = p_values.iter().filter(|&&p| p <= alpha).count();
        let rate = if completed > 0 { rejections as f64 / completed as f64 } else { 0.0 };
        let (ci_low, ci_high) = wilson_interval(rejections, completed, WILSON_Z);
        let mean_p_value = (completed > 0).then(|| p_values.iter().sum::<f64>() / completed as f64);
        let failures = replications - completed;
        let mut failure_messages = failure_messages;
        failure_messages.truncate(5);
        CellReport {
            index,
            n,
            params,
            replications,
            completed,
            failures,
            rejections,
            rate,
            ci_low,
            ci_high,
            mean_p_value,
            wall_time_s: None,
            failure_messages,
            p_values,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectionRateReport {
    pub config: ExperimentConfig,
    /// SHA-256 of the canonical JSON form of `config`.
    pub config_hash: String,
    pub seed: u64,
    pub cells: Vec<CellReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Json,
    Csv,
}

impl ReportFormat {
    /// From a file extension, defaulting to JSON.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => ReportFormat::Csv,
            _ => ReportFormat::Json,
        }
    }
}

fn value_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// One row per cell, columns in a fixed order.
pub fn report_csv(report: &RejectionRateReport) -> Result<String> {
    let names: Vec<&String> = report.config.grid.params.keys().collect();
    let with_time = report.config.record_wall_time;
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = vec!["cell".into(), "n".into()];
    header.extend(names.iter().map(|s| s.to_string()));
    header.extend(
        ["replications", "completed", "failures", "rejections", "rate", "ci_low", "ci_high", "mean_p_value"]
            .map(String::from),
    );
    if with_time {
        header.push("wall_time_s".into());
    }
    let csv_err = |e: csv::Error| Error::Config(format!("csv output: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for c in &report.cells {
        let mut row = vec![c.index.to_string(), c.n.to_string()];
        row.extend(names.iter().map(|k| c.params.get(*k).map(value_cell).unwrap_or_default()));
        row.extend([
            c.replications.to_string(),
            c.completed.to_string(),
            c.failures.to_string(),
            c.rejections.to_string(),
            c.rate.to_string(),
            c.ci_low.to_string(),
            c.ci_high.to_string(),
            c.mean_p_value.map(|v| v.to_string()).unwrap_or_default(),
        ]);
        if with_time {
            row.push(c.wall_time_s.map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&row).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

/// Write the report to `path` as JSON (full record) or CSV (one row per cell).
pub fn emit_report(report: &RejectionRateReport, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).map_err(|e| Error::Config(e.to_string()))?;
            s.push('\n');
            s
        }
        ReportFormat::Csv => report_csv(report)?,
    };
    let io = |source| Error::Io { path: path.into(), source };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(text.as_bytes()).map_err(io)?;
    f.flush().map_err(io)
}

/// Counts of p-values at each atom `k/(B+1)`, `k = 1..=B+1`.
pub fn p_value_histogram(p_values: &[f64], b: usize) -> Vec<usize> {
    let mut counts = vec![0; b + 1];
    for &p in p_values {
        let k = (p * (b + 1) as f64).round() as usize;
        counts[k.clamp(1, b + 1) - 1] += 1;
    }
    counts
}
