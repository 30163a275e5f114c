//! JSON experiment configuration.
//!
//! A minimal file names the scheme, the app, the matrix source and the
//! speed model; everything else has a default:
//!
//! ```json
//! {
//!   "scheme": { "kind": "s2c2_general", "n": 10, "k": 7 },
//!   "app": { "kind": "pagerank" },
//!   "matrix": { "kind": "synthetic", "rows": 700, "cols": 700, "seed": 1 },
//!   "speed_model": { "kind": "constant", "speeds": [1, 1, 1, 1, 1, 1, 1, 1, 1, 1] }
//! }
//! ```
//!
//! | key           | default                   |
//! |---------------|---------------------------|
//! | `iterations`  | 15                        |
//! | `predictor`   | `"lstm"`                  |
//! | `c_target`    | 20                        |
//! | `theta`       | 0.15                      |
//! | `cost`        | row cost 1, all else free |
//! | `generator`   | `{"kind": "auto"}`        |
//! | `seed`        | 0                         |
//! | `output`      | `"run"` (file prefix)     |
//! | `lstm_model`  | trained on the fly        |
//! | `baseline`    | none                      |
//! | `verify`      | true                      |
//!
//! App hyperparameters default to `eta = 0.5` (LR), `eta = 0.1,
//! lambda = 0.01` (SVM), `alpha = 0.85` (PageRank) and `hops = 1`.
//! Relative paths are resolved against the directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use sscc_core::apps::{App, Dataset};
use sscc_core::io::{read_labels, read_matrix};
use sscc_core::predictor::{LstmModel, PredictorKind};
use sscc_core::sim::{
    CostModel, ExperimentConfig, GeneratorChoice, Injection, SimError, SpeedModel, SpeedTrace, Strategy, TraceParams,
};
use sscc_core::DenseVector;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("malformed JSON: {0}")]
    Syntax(String),
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value for `{key}`: {message}")]
    InvalidValue { key: String, message: String },
}

impl ConfigError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        Self::InvalidValue {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSource {
    /// Generated by `Dataset::synthetic` for the configured app.
    Synthetic { rows: usize, cols: usize, seed: u64 },
    /// A matrix file (CSV, or binary for `.bin`), with optional labels and
    /// starting vector files.
    File {
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        x0: Option<PathBuf>,
    },
}

fn default_min_level() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpeedSource {
    Constant {
        speeds: Vec<f64>,
    },
    StragglerInjection {
        base: Vec<f64>,
        injections: Vec<Injection>,
    },
    /// Generated for as many iterations as the experiment runs.
    Stochastic {
        base: Vec<f64>,
        noise: f64,
        change_prob: f64,
        #[serde(default = "default_min_level")]
        min_level: f64,
        #[serde(default)]
        injections: Vec<Injection>,
        seed: u64,
    },
    /// A CSV file with header `iter,worker,speed`.
    Trace {
        path: PathBuf,
    },
}

impl SpeedSource {
    pub fn to_model(&self) -> Result<SpeedModel, ConfigError> {
        Ok(match self {
            Self::Constant { speeds } => SpeedModel::Constant { speeds: speeds.clone() },
            Self::StragglerInjection { base, injections } => SpeedModel::StragglerInjection {
                base: base.clone(),
                injections: injections.clone(),
            },
            Self::Stochastic {
                base,
                noise,
                change_prob,
                min_level,
                injections,
                seed,
            } => SpeedModel::Stochastic {
                params: TraceParams {
                    base: base.clone(),
                    iterations: 1,
                    noise: *noise,
                    change_prob: *change_prob,
                    min_level: *min_level,
                    injections: injections.clone(),
                },
                seed: *seed,
            },
            Self::Trace { path } => SpeedModel::Trace {
                trace: SpeedTrace::read(path).map_err(|e| ConfigError::invalid("speed_model.path", e.to_string()))?,
            },
        })
    }
}

fn default_iterations() -> usize {
    15
}
fn default_predictor() -> PredictorKind {
    PredictorKind::Lstm
}
fn default_c_target() -> usize {
    20
}
fn default_theta() -> f64 {
    0.15
}
fn default_output() -> String {
    "run".into()
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: Strategy,
    pub app: App,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    pub matrix: MatrixSource,
    pub speed_model: SpeedSource,
    #[serde(default = "default_predictor")]
    pub predictor: PredictorKind,
    #[serde(default = "default_c_target")]
    pub c_target: usize,
    #[serde(default = "default_theta")]
    pub theta: f64,
    #[serde(default)]
    pub cost: CostModel,
    #[serde(default)]
    pub generator: GeneratorChoice,
    #[serde(default)]
    pub seed: u64,
    /// Prefix of the output files.
    #[serde(default = "default_output")]
    pub output: String,
    /// A model file written by `sscc train`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lstm_model: Option<PathBuf>,
    /// Scheme run on the same data and speeds for the normalized latency.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<Strategy>,
    #[serde(default = "yes")]
    pub verify: bool,
}

fn unknown_field(message: &str) -> Option<&str> {
    let rest = message.strip_prefix("unknown field `")?;
    rest.split('`').next()
}

fn join_key(path: &str, field: &str) -> String {
    if path.is_empty() || path == "." {
        field.to_string()
    } else if path == field || path.ends_with(&format!(".{field}")) {
        path.to_string()
    } else {
        format!("{path}.{field}")
    }
}

impl RunConfig {
    /// Parses and validates a config; relative paths stay as written.
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            let message = inner.to_string();
            if let Some(field) = unknown_field(&message) {
                ConfigError::UnknownKey(join_key(&path, field))
            } else if inner.is_syntax() || inner.is_eof() {
                ConfigError::Syntax(message)
            } else {
                let key = if path == "." { String::new() } else { path };
                ConfigError::InvalidValue { key, message }
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Makes every relative path relative to `dir` instead.
    pub fn resolve_paths(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        if let MatrixSource::File { path, labels, x0 } = &mut self.matrix {
            fix(path);
            labels.as_mut().map(fix);
            x0.as_mut().map(fix);
        }
        if let SpeedSource::Trace { path } = &mut self.speed_model {
            fix(path);
        }
        self.lstm_model.as_mut().map(fix);
    }

    /// Checks everything that does not need the data files.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if let MatrixSource::Synthetic { rows, cols, .. } = self.matrix {
            if rows == 0 {
                return Err(ConfigError::invalid("matrix.rows", "must be positive"));
            }
            if cols == 0 {
                return Err(ConfigError::invalid("matrix.cols", "must be positive"));
            }
        }
        if self.output.is_empty() || self.output.contains(['/', '\\']) {
            return Err(ConfigError::invalid("output", "must be a plain file name prefix"));
        }
        if !matches!(self.speed_model, SpeedSource::Trace { .. }) {
            self.experiment_with(self.speed_model.to_model()?, &self.scheme)
                .validate()
                .map_err(sim_to_config)?;
        }
        if let Some(b) = &self.baseline {
            let mut cfg = self.experiment_with(SpeedModel::Constant { speeds: vec![1.0; b.n()] }, b);
            cfg.strategy = b.clone();
            cfg.validate().map_err(|e| match sim_to_config(e) {
                ConfigError::InvalidValue { key, message } => {
                    ConfigError::invalid(&key.replacen("scheme", "baseline", 1), message)
                }
                other => other,
            })?;
            if b.n() != self.scheme.n() {
                return Err(ConfigError::invalid("baseline.n", "must equal scheme.n"));
            }
        }
        Ok(())
    }

    fn experiment_with(&self, speed_model: SpeedModel, strategy: &Strategy) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(strategy.clone(), self.app.clone(), speed_model);
        cfg.iterations = self.iterations;
        cfg.predictor = self.predictor;
        cfg.c_target = self.c_target;
        cfg.theta = self.theta;
        cfg.cost = self.cost.clone();
        cfg.generator = self.generator.clone();
        cfg.seed = self.seed;
        cfg.verify = self.verify;
        cfg
    }

    /// The simulator configuration, reading the trace and model files.
    pub fn experiment(&self) -> Result<ExperimentConfig, ConfigError> {
        let mut cfg = self.experiment_with(self.speed_model.to_model()?, &self.scheme);
        if let Some(path) = &self.lstm_model {
            let text = read_text(path)?;
            let model = LstmModel::from_json(&text).map_err(|e| ConfigError::invalid("lstm_model", e.to_string()))?;
            cfg.lstm_model = Some(model);
        }
        cfg.validate().map_err(sim_to_config)?;
        Ok(cfg)
    }

    pub fn dataset(&self) -> Result<Dataset, ConfigError> {
        match &self.matrix {
            MatrixSource::Synthetic { rows, cols, seed } => Dataset::synthetic(&self.app, *rows, *cols, *seed)
                .map_err(|e| ConfigError::invalid("matrix", e.to_string())),
            MatrixSource::File { path, labels, x0 } => {
                let io = |key: &'static str| move |e: sscc_core::io::IoError| ConfigError::invalid(key, e.to_string());
                let a = read_matrix(path).map_err(io("matrix.path"))?;
                let y = labels.as_deref().map(read_labels).transpose().map_err(io("matrix.labels"))?;
                // Any shape; read in row-major order.
                let x0 = x0
                    .as_deref()
                    .map(read_matrix)
                    .transpose()
                    .map_err(io("matrix.x0"))?
                    .map(|m| DenseVector::new(m.data().to_vec()));
                Ok(Dataset { a, y, x0 })
            }
        }
    }
}

fn sim_to_config(e: SimError) -> ConfigError {
    match e {
        SimError::Invalid { field, message } => ConfigError::InvalidValue { key: field, message },
        other => ConfigError::invalid("", other.to_string()),
    }
}

fn read_text(path: &Path) -> Result<String, ConfigError> {
    fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

/// Reads, parses and validates a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::from_json(&read_text(path)?)?;
    if let Some(dir) = path.parent() {
        cfg.resolve_paths(dir);
    }
    if let SpeedSource::Trace { .. } = cfg.speed_model {
        cfg.experiment()?;
    }
    Ok(cfg)
}
