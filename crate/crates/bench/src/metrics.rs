//! Versioned CSV and JSON outputs.
//!
//! Every CSV starts with the line `# schema=1`, then a header. Floats are
//! written with 17 significant digits so identical runs give identical
//! bytes.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use sscc_core::sim::MetricsReport;

pub const SCHEMA: u32 = 1;
pub const SCHEMA_LINE: &str = "# schema=1";

pub const METRICS_COLUMNS: [&str; 9] = [
    "iter",
    "strategy",
    "latency_total",
    "latency_compute",
    "latency_comm",
    "latency_decode",
    "wasted_rows",
    "mispredicted",
    "reassigned",
];

pub const WASTE_COLUMNS: [&str; 5] = ["worker", "strategy", "computed_rows", "used_rows", "wasted_rows"];

#[derive(Debug, Error)]
pub enum SchemaError {
    #[error("{source_name}: expected first line `{SCHEMA_LINE}`")]
    MissingVersion { source_name: String },
    #[error("{source_name}: missing column `{column}`")]
    MissingColumn { source_name: String, column: String },
    #[error("{source_name}: line {line}: {message}")]
    BadValue {
        source_name: String,
        line: u64,
        message: String,
    },
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub(crate) fn write_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
    format!("{SCHEMA_LINE}\n{body}")
}

/// One row per iteration.
pub fn metrics_csv(report: &MetricsReport) -> String {
    let rows = report.records.iter().map(|r| {
        let wasted: usize = r.workers.iter().map(|w| w.wasted_rows).sum();
        vec![
            r.iter.to_string(),
            report.strategy.clone(),
            fmt_f64(r.latency.total),
            fmt_f64(r.latency.compute),
            fmt_f64(r.latency.comm),
            fmt_f64(r.latency.decode),
            wasted.to_string(),
            flag(r.mispredicted).into(),
            flag(r.reassigned).into(),
        ]
    });
    write_table(&METRICS_COLUMNS, rows)
}

/// One row per worker, summed over iterations.
pub fn waste_csv(report: &MetricsReport) -> String {
    let n = report.waste_per_worker.len();
    let rows = (0..n).map(|w| {
        let sum = |f: fn(&sscc_core::sim::WorkerRound) -> usize| -> usize {
            report.records.iter().map(|r| f(&r.workers[w])).sum()
        };
        vec![
            w.to_string(),
            report.strategy.clone(),
            sum(|r| r.computed_rows).to_string(),
            sum(|r| r.used_rows).to_string(),
            report.waste_per_worker[w].to_string(),
        ]
    });
    write_table(&WASTE_COLUMNS, rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub iter: usize,
    pub strategy: String,
    pub latency_total: f64,
    pub latency_compute: f64,
    pub latency_comm: f64,
    pub latency_decode: f64,
    pub wasted_rows: usize,
    pub mispredicted: bool,
    pub reassigned: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WasteRow {
    pub worker: usize,
    pub strategy: String,
    pub computed_rows: usize,
    pub used_rows: usize,
    pub wasted_rows: usize,
}

/// Checks the version line and header, then hands out each record as a
/// column-name lookup.
fn read_table<T>(
    text: &str,
    source_name: &str,
    columns: &[&str],
    mut row: impl FnMut(&dyn Fn(&str) -> Result<String, String>) -> Result<T, String>,
) -> Result<Vec<T>, SchemaError> {
    let mut lines = text.splitn(2, '\n');
    if lines.next().map(str::trim_end) != Some(SCHEMA_LINE) {
        return Err(SchemaError::MissingVersion {
            source_name: source_name.into(),
        });
    }
    let body = lines.next().unwrap_or("");
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let bad = |line: u64, message: String| SchemaError::BadValue {
        source_name: source_name.into(),
        line,
        message,
    };
    let header = r.headers().map_err(|e| bad(2, e.to_string()))?.clone();
    let index: HashMap<&str, usize> = header.iter().enumerate().map(|(i, h)| (h, i)).collect();
    if let Some(missing) = columns.iter().find(|c| !index.contains_key(*c)) {
        return Err(SchemaError::MissingColumn {
            source_name: source_name.into(),
            column: (*missing).into(),
        });
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(0, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line() + 1);
        let get = |c: &str| -> Result<String, String> {
            rec.get(index[c]).map(str::to_string).ok_or_else(|| format!("no value for `{c}`"))
        };
        out.push(row(&get).map_err(|m| bad(line, m))?);
    }
    Ok(out)
}

fn parse<T: std::str::FromStr>(get: &dyn Fn(&str) -> Result<String, String>, c: &str) -> Result<T, String> {
    let v = get(c)?;
    v.trim().parse().map_err(|_| format!("bad value `{v}` for `{c}`"))
}

fn parse_flag(get: &dyn Fn(&str) -> Result<String, String>, c: &str) -> Result<bool, String> {
    match get(c)?.trim() {
        "1" | "true" => Ok(true),
        "0" | "false" => Ok(false),
        v => Err(format!("bad value `{v}` for `{c}`")),
    }
}

pub fn parse_metrics(text: &str, source_name: &str) -> Result<Vec<MetricsRow>, SchemaError> {
    read_table(text, source_name, &METRICS_COLUMNS, |get| {
        Ok(MetricsRow {
            iter: parse(get, "iter")?,
            strategy: get("strategy")?,
            latency_total: parse(get, "latency_total")?,
            latency_compute: parse(get, "latency_compute")?,
            latency_comm: parse(get, "latency_comm")?,
            latency_decode: parse(get, "latency_decode")?,
            wasted_rows: parse(get, "wasted_rows")?,
            mispredicted: parse_flag(get, "mispredicted")?,
            reassigned: parse_flag(get, "reassigned")?,
        })
    })
}

pub fn parse_waste(text: &str, source_name: &str) -> Result<Vec<WasteRow>, SchemaError> {
    read_table(text, source_name, &WASTE_COLUMNS, |get| {
        Ok(WasteRow {
            worker: parse(get, "worker")?,
            strategy: get("strategy")?,
            computed_rows: parse(get, "computed_rows")?,
            used_rows: parse(get, "used_rows")?,
            wasted_rows: parse(get, "wasted_rows")?,
        })
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub strategy: String,
    pub mean_latency: f64,
    pub wasted_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub schema: u32,
    pub strategy: String,
    pub app: String,
    pub iterations: usize,
    pub seed: u64,
    pub mean_latency: f64,
    pub total_latency: f64,
    pub computed_rows: usize,
    pub used_rows: usize,
    pub wasted_rows: usize,
    pub waste_fraction: f64,
    pub mispredict_rate: f64,
    pub reassigned_iterations: usize,
    pub baseline: Option<BaselineSummary>,
    /// Mean latency over the baseline's.
    pub normalized_latency: Option<f64>,
    /// Baseline mean latency over ours.
    pub speedup: Option<f64>,
}

impl Summary {
    pub fn new(report: &MetricsReport, app: &str, seed: u64, baseline: Option<&MetricsReport>) -> Self {
        Self {
            schema: SCHEMA,
            strategy: report.strategy.clone(),
            app: app.into(),
            iterations: report.records.len(),
            seed,
            mean_latency: report.mean_latency,
            total_latency: report.total_latency,
            computed_rows: report.computed_rows,
            used_rows: report.used_rows,
            wasted_rows: report.wasted_rows,
            waste_fraction: report.waste_fraction(),
            mispredict_rate: report.mispredict_rate,
            reassigned_iterations: report.reassigned_iterations,
            baseline: baseline.map(|b| BaselineSummary {
                strategy: b.strategy.clone(),
                mean_latency: b.mean_latency,
                wasted_rows: b.wasted_rows,
            }),
            normalized_latency: baseline.map(|b| report.normalized_to(b)),
            speedup: baseline.map(|b| b.normalized_to(report)),
        }
    }
}
