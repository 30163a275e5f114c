use std::path::{Path, PathBuf};

use sscc_core::sim::{run_experiment, EventLog, ExperimentConfig, MetricsReport};

use crate::config::RunConfig;
use crate::metrics::{metrics_csv, waste_csv, Summary};
use crate::{write_file, CliError};

#[derive(Debug, Clone)]
pub struct RunResults {
    pub report: MetricsReport,
    pub baseline: Option<MetricsReport>,
    pub summary: Summary,
    pub log: EventLog,
}

#[derive(Debug, Clone)]
pub struct RunFiles {
    pub metrics: PathBuf,
    pub waste: PathBuf,
    pub summary: PathBuf,
    /// Metrics of the baseline run, when one is configured.
    pub baseline_metrics: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub results: RunResults,
}

/// Runs the configured scheme and its baseline without writing anything.
pub fn execute(cfg: &RunConfig) -> Result<RunResults, CliError> {
    let exp = cfg.experiment()?;
    let data = cfg.dataset()?;
    let out = run_experiment(&exp, &data)?;
    let baseline = match &cfg.baseline {
        Some(b) => {
            let bexp = ExperimentConfig {
                strategy: b.clone(),
                ..exp.clone()
            };
            Some(run_experiment(&bexp, &data)?.report)
        }
        None => None,
    };
    let summary = Summary::new(&out.report, exp.app.name(), cfg.seed, baseline.as_ref());
    Ok(RunResults {
        report: out.report,
        baseline,
        summary,
        log: out.log,
    })
}

/// Writes `<output>_metrics.csv`, `<output>_waste.csv` and
/// `<output>_summary.json` into `out_dir`, plus
/// `<output>_baseline_metrics.csv` for a configured baseline and
/// `<output>_events.csv` when asked. Nothing is written if either run fails.
pub fn cmd_run(cfg: &RunConfig, out_dir: &Path, events: bool) -> Result<RunFiles, CliError> {
    let results = execute(cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io {
        path: out_dir.display().to_string(),
        message: e.to_string(),
    })?;
    let name = |suffix: &str| out_dir.join(format!("{}_{suffix}", cfg.output));
    let files = RunFiles {
        metrics: name("metrics.csv"),
        waste: name("waste.csv"),
        summary: name("summary.json"),
        baseline_metrics: results.baseline.as_ref().map(|_| name("baseline_metrics.csv")),
        events: events.then(|| name("events.csv")),
        results,
    };
    write_file(&files.metrics, &metrics_csv(&files.results.report))?;
    write_file(&files.waste, &waste_csv(&files.results.report))?;
    let summary = serde_json::to_string_pretty(&files.results.summary).expect("summary serializes");
    write_file(&files.summary, &(summary + "\n"))?;
    if let (Some(path), Some(b)) = (&files.baseline_metrics, &files.results.baseline) {
        write_file(path, &metrics_csv(b))?;
    }
    if let Some(path) = &files.events {
        write_file(path, &files.results.log.to_csv())?;
    }
    log::info!(
        "{}: mean latency {} over {} iterations",
        files.results.summary.strategy,
        files.results.summary.mean_latency,
        files.results.summary.iterations
    );
    Ok(files)
}
