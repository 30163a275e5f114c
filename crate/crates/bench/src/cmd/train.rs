use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sscc_core::predictor::{
    ar1_one_step, evaluate_split, last_value_one_step, lstm_one_step, lstm_train, Ar1Model, LstmModel, PredictError,
    TrainConfig,
};
use sscc_core::sim::SpeedTrace;

use crate::metrics::{fmt_f64, SCHEMA};
use crate::{read_file, write_file, CliError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapeRow {
    pub predictor: String,
    pub train_mape: f64,
    pub test_mape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Ar1File {
    schema: u32,
    /// One model per trace, fitted on its training part.
    models: Vec<Ar1Model>,
}

#[derive(Debug, Clone)]
pub struct TrainFiles {
    pub lstm: PathBuf,
    pub ar1: PathBuf,
    pub report: PathBuf,
    pub model: LstmModel,
    pub rows: Vec<MapeRow>,
}

/// Every worker series of every trace file.
pub fn read_traces(paths: &[PathBuf]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut series = Vec::new();
    for p in paths {
        let trace = SpeedTrace::from_csv(&read_file(p)?).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
        series.extend(trace.speeds);
    }
    Ok(series)
}

/// Train and test MAPE of last value, AR(1) and the given LSTM.
pub fn evaluate_predictors(
    traces: &[Vec<f64>],
    cfg: &TrainConfig,
    model: &LstmModel,
) -> Result<Vec<MapeRow>, PredictError> {
    let row = |name: &str, (train, test): (f64, f64)| MapeRow {
        predictor: name.into(),
        train_mape: train,
        test_mape: test,
    };
    // Surface AR(1) fitting errors before the infallible closure below.
    for s in traces {
        ar1_one_step(s, cfg)?;
    }
    Ok(vec![
        row("last_value", evaluate_split(traces, cfg, last_value_one_step)?),
        row(
            "ar1",
            evaluate_split(traces, cfg, |s| ar1_one_step(s, cfg).expect("checked above"))?,
        ),
        row("lstm", evaluate_split(traces, cfg, |s| lstm_one_step(model, s))?),
    ])
}

/// Trains the LSTM and per-trace AR(1) models, writing `lstm.json`,
/// `ar1.json` and `mape.csv` into `out_dir`.
pub fn cmd_train(traces: &[Vec<f64>], cfg: &TrainConfig, out_dir: &Path) -> Result<TrainFiles, CliError> {
    let model = lstm_train(traces, cfg)?;
    let models = traces
        .iter()
        .map(|s| Ar1Model::fit(&s[..cfg.split_point(s.len()).max(2).min(s.len())]))
        .collect::<Result<Vec<_>, _>>()?;
    let rows = evaluate_predictors(traces, cfg, &model)?;
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::Io {
        path: out_dir.display().to_string(),
        message: e.to_string(),
    })?;
    let files = TrainFiles {
        lstm: out_dir.join("lstm.json"),
        ar1: out_dir.join("ar1.json"),
        report: out_dir.join("mape.csv"),
        model,
        rows,
    };
    write_file(&files.lstm, &(files.model.to_json() + "\n"))?;
    let ar1 = serde_json::to_string_pretty(&Ar1File { schema: SCHEMA, models }).expect("models serialize");
    write_file(&files.ar1, &(ar1 + "\n"))?;
    let mut report = format!("# schema={SCHEMA}\npredictor,train_mape,test_mape\n");
    for r in &files.rows {
        report += &format!("{},{},{}\n", r.predictor, fmt_f64(r.train_mape), fmt_f64(r.test_mape));
    }
    write_file(&files.report, &report)?;
    Ok(files)
}
