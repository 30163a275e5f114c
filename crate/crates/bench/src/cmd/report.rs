use std::path::{Path, PathBuf};

use crate::metrics::{fmt_f64, parse_metrics, parse_waste, write_table, MetricsRow, WasteRow};
use crate::{read_file, write_file, CliError};

pub const LATENCY_COLUMNS: [&str; 8] = [
    "group",
    "strategy",
    "iterations",
    "mean_latency",
    "normalized_latency",
    "wasted_rows",
    "mispredicted_iterations",
    "reassigned_iterations",
];

pub const WASTE_TABLE_COLUMNS: [&str; 6] = ["group", "strategy", "worker", "computed_rows", "used_rows", "wasted_rows"];

/// A results file and the group its rows belong to, such as a straggler
/// count. Written `GROUP=PATH` on the command line; a bare path uses its
/// file stem.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportInput {
    pub group: String,
    pub path: PathBuf,
}

impl std::str::FromStr for ReportInput {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.is_empty() {
            return Err("empty input".into());
        }
        Ok(match s.split_once('=') {
            Some((group, path)) => Self {
                group: group.into(),
                path: path.into(),
            },
            None => {
                let path = PathBuf::from(s);
                let group = path.file_stem().map_or_else(|| s.to_string(), |g| g.to_string_lossy().into_owned());
                Self { group, path }
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct ReportFiles {
    pub latency: PathBuf,
    pub waste: PathBuf,
}

/// Mean latency per (group, strategy), normalized to `baseline` within
/// the same group when it is present there.
pub fn latency_table(inputs: &[(String, Vec<MetricsRow>)], baseline: &str) -> String {
    struct Entry<'a> {
        group: &'a str,
        strategy: &'a str,
        rows: Vec<&'a MetricsRow>,
    }
    let mut entries: Vec<Entry> = Vec::new();
    for (group, rows) in inputs {
        for r in rows {
            match entries.iter_mut().find(|e| e.group == group && e.strategy == r.strategy) {
                Some(e) => e.rows.push(r),
                None => entries.push(Entry {
                    group,
                    strategy: &r.strategy,
                    rows: vec![r],
                }),
            }
        }
    }
    let mean = |e: &Entry| e.rows.iter().map(|r| r.latency_total).sum::<f64>() / e.rows.len() as f64;
    let rows: Vec<Vec<String>> = entries
        .iter()
        .map(|e| {
            let m = mean(e);
            let norm = entries
                .iter()
                .find(|b| b.group == e.group && b.strategy == baseline)
                .map_or(String::new(), |b| fmt_f64(m / mean(b)));
            vec![
                e.group.to_string(),
                e.strategy.to_string(),
                e.rows.len().to_string(),
                fmt_f64(m),
                norm,
                e.rows.iter().map(|r| r.wasted_rows).sum::<usize>().to_string(),
                e.rows.iter().filter(|r| r.mispredicted).count().to_string(),
                e.rows.iter().filter(|r| r.reassigned).count().to_string(),
            ]
        })
        .collect();
    write_table(&LATENCY_COLUMNS, rows)
}

pub fn waste_table(inputs: &[(String, Vec<WasteRow>)]) -> String {
    let rows: Vec<Vec<String>> = inputs
        .iter()
        .flat_map(|(group, rows)| {
            rows.iter().map(move |r| {
                vec![
                    group.clone(),
                    r.strategy.clone(),
                    r.worker.to_string(),
                    r.computed_rows.to_string(),
                    r.used_rows.to_string(),
                    r.wasted_rows.to_string(),
                ]
            })
        })
        .collect();
    write_table(&WASTE_TABLE_COLUMNS, rows)
}

/// Writes `latency.csv` and `waste.csv` into `out_dir`.
pub fn cmd_report(
    metrics: &[ReportInput],
    waste: &[ReportInput],
    baseline: &str,
    out_dir: &Path,
) -> Result<ReportFiles, CliError> {
    let load = |i: &ReportInput| -> Result<(String, String), CliError> {
        Ok((i.group.clone(), read_file(&i.path)?))
    };
    let mut m = Vec::new();
    for i in metrics {
        let (group, text) = load(i)?;
        m.push((group, parse_metrics(&text, &i.path.display().to_string())?));
    }
    let mut w = Vec::new();
    for i in waste {
        let (group, text) = load(i)?;
        w.push((group, parse_waste(&text, &i.path.display().to_string())?));
    }
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io {
        path: out_dir.display().to_string(),
        message: e.to_string(),
    })?;
    let files = ReportFiles {
        latency: out_dir.join("latency.csv"),
        waste: out_dir.join("waste.csv"),
    };
    write_file(&files.latency, &latency_table(&m, baseline))?;
    write_file(&files.waste, &waste_table(&w))?;
    Ok(files)
}
