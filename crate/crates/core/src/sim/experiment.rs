//! Running an app for a number of iterations on a simulated cluster.

use serde::{Deserialize, Serialize};

use crate::apps::{App, AppState, Dataset};
use crate::predictor::{lstm_train, LstmModel, PredictorKind, SpeedPredictor, TrainConfig};

use super::cluster::{Cluster, ClusterSettings, GeneratorChoice, IterationRecord, Strategy};
use super::cost::CostModel;
use super::events::EventLog;
use super::speed::{gen_speed_trace, synthetic_family, SpeedModel, SpeedTrace};
use super::{invalid, SimError};

/// Length of each trace used to train the default LSTM.
pub const DEFAULT_TRAINING_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub strategy: Strategy,
    pub app: App,
    pub iterations: usize,
    pub speed_model: SpeedModel,
    pub predictor: PredictorKind,
    pub c_target: usize,
    pub theta: f64,
    pub cost: CostModel,
    pub generator: GeneratorChoice,
    pub seed: u64,
    /// Used by the LSTM predictor; one is trained when absent.
    pub lstm_model: Option<LstmModel>,
    pub verify: bool,
}

impl ExperimentConfig {
    /// 15 iterations, LSTM predictor, `C_target = 20`, `theta = 0.15`,
    /// default costs, automatic generator, seed 0.
    pub fn new(strategy: Strategy, app: App, speed_model: SpeedModel) -> Self {
        Self {
            strategy,
            app,
            iterations: 15,
            speed_model,
            predictor: PredictorKind::Lstm,
            c_target: 20,
            theta: 0.15,
            cost: CostModel::default(),
            generator: GeneratorChoice::Auto,
            seed: 0,
            lstm_model: None,
            verify: true,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.strategy.validate().map_err(|e| match e {
            SimError::Invalid { field, message } => invalid(&format!("scheme.{field}"), message),
            other => other,
        })?;
        self.app
            .validate()
            .map_err(|(field, m)| invalid(&format!("app.{field}"), m))?;
        if self.iterations == 0 {
            return Err(invalid("iterations", "must be positive"));
        }
        if self.c_target == 0 {
            return Err(invalid("c_target", "must be positive"));
        }
        if !(self.theta > 0.0 && self.theta.is_finite()) {
            return Err(invalid("theta", "must be positive"));
        }
        self.cost.validate().map_err(|e| invalid("cost", e.to_string()))?;
        if self.speed_model.workers() != self.strategy.n() {
            return Err(invalid(
                "speed_model",
                format!(
                    "{} workers in the speed model, scheme has n = {}",
                    self.speed_model.workers(),
                    self.strategy.n()
                ),
            ));
        }
        if let (Strategy::Poly { a, b, .. }, App::Hessian) = (&self.strategy, &self.app) {
            if a != b {
                return Err(invalid("scheme.b", "the hessian layout needs b == a"));
            }
        }
        if matches!(self.app, App::Hessian) != matches!(self.strategy, Strategy::Poly { .. }) {
            return Err(invalid("scheme.kind", "the hessian app runs with the poly scheme and only with it"));
        }
        Ok(())
    }

    fn settings(&self) -> ClusterSettings {
        ClusterSettings {
            c_target: self.c_target,
            theta: self.theta,
            cost: self.cost.clone(),
            generator: self.generator.clone(),
            seed: self.seed,
            verify: self.verify,
        }
    }
}

/// Trains an LSTM on the synthetic trace family scaled so its base speed
/// is `base`.
pub fn default_lstm(base: f64, seed: u64) -> Result<LstmModel, SimError> {
    let mut params = synthetic_family(DEFAULT_TRAINING_ITERATIONS);
    params.base.iter_mut().for_each(|b| *b = base);
    let traces = gen_speed_trace(&params, seed)?.speeds;
    let cfg = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    Ok(lstm_train(&traces, &cfg)?)
}

fn build_predictor(cfg: &ExperimentConfig, trace: &SpeedTrace) -> Result<SpeedPredictor, SimError> {
    let n = cfg.strategy.n();
    if cfg.predictor != PredictorKind::Lstm {
        return Ok(SpeedPredictor::new(cfg.predictor, n));
    }
    let model = match &cfg.lstm_model {
        Some(m) => m.clone(),
        None if cfg.strategy.uses_prediction() => {
            let base = trace.speeds.iter().flatten().fold(0.0_f64, |a, &b| a.max(b));
            if !(base > 0.0) {
                return Err(SimError::Trace("every speed in the trace is zero".into()));
            }
            default_lstm(base, cfg.seed)?
        }
        // Predictions are recorded but unused; skip training.
        None => return Ok(SpeedPredictor::new(PredictorKind::LastValue, n)),
    };
    Ok(SpeedPredictor::with_lstm(model, n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WasteCount {
    pub per_worker: Vec<usize>,
    pub total: usize,
}

/// Rows computed but not used, per worker and in total.
pub fn wasted_rows(records: &[IterationRecord]) -> WasteCount {
    let n = records.first().map_or(0, |r| r.workers.len());
    let mut per_worker = vec![0; n];
    for r in records {
        for (acc, w) in per_worker.iter_mut().zip(&r.workers) {
            *acc += w.wasted_rows;
        }
    }
    let total = per_worker.iter().sum();
    WasteCount { per_worker, total }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub strategy: String,
    pub records: Vec<IterationRecord>,
    pub total_latency: f64,
    pub mean_latency: f64,
    pub computed_rows: usize,
    pub used_rows: usize,
    pub wasted_rows: usize,
    pub waste_per_worker: Vec<usize>,
    pub mispredict_rate: f64,
    pub reassigned_iterations: usize,
}

impl MetricsReport {
    pub fn from_records(strategy: &str, records: Vec<IterationRecord>) -> Self {
        let total_latency: f64 = records.iter().map(|r| r.latency.total).sum();
        let count = records.len().max(1) as f64;
        let waste = wasted_rows(&records);
        let sum = |f: fn(&super::round::WorkerRound) -> usize| -> usize {
            records.iter().flat_map(|r| r.workers.iter()).map(f).sum()
        };
        Self {
            strategy: strategy.to_string(),
            total_latency,
            mean_latency: total_latency / count,
            computed_rows: sum(|w| w.computed_rows),
            used_rows: sum(|w| w.used_rows),
            wasted_rows: waste.total,
            waste_per_worker: waste.per_worker,
            mispredict_rate: records.iter().filter(|r| r.mispredicted).count() as f64 / count,
            reassigned_iterations: records.iter().filter(|r| r.reassigned).count(),
            records,
        }
    }

    /// Mean latency relative to `baseline`.
    pub fn normalized_to(&self, baseline: &MetricsReport) -> f64 {
        self.mean_latency / baseline.mean_latency
    }

    /// Fraction of computed rows that were wasted.
    pub fn waste_fraction(&self) -> f64 {
        if self.computed_rows == 0 {
            0.0
        } else {
            self.wasted_rows as f64 / self.computed_rows as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub report: MetricsReport,
    pub state: AppState,
    pub log: EventLog,
}

pub fn run_experiment(cfg: &ExperimentConfig, data: &Dataset) -> Result<ExperimentOutput, SimError> {
    cfg.validate()?;
    cfg.app.check(data)?;
    let trace = cfg.speed_model.materialize(cfg.iterations)?;
    let predictor = build_predictor(cfg, &trace)?;
    let mut cluster = Cluster::new(cfg.strategy.clone(), &cfg.app, data, cfg.settings(), trace, predictor)?;
    let mut state = cfg.app.init_state(data);
    let mut records = Vec::with_capacity(cfg.iterations);
    for iter in 0..cfg.iterations {
        cluster.begin_iteration(iter)?;
        state = cfg.app.step(&state, data, &mut cluster)?;
        records.push(cluster.end_iteration()?);
    }
    log::debug!("{} finished at virtual time {}", cfg.strategy.name(), cluster.clock());
    Ok(ExperimentOutput {
        report: MetricsReport::from_records(cfg.strategy.name(), records),
        state,
        log: cluster.into_log(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equal(n: usize) -> SpeedModel {
        SpeedModel::Constant { speeds: vec![1.0; n] }
    }

    #[test]
    fn mds_four_two_wastes_two_workers() {
        let app = App::GraphFilter { hops: 1 };
        let data = Dataset::synthetic(&app, 12, 12, 1).unwrap();
        let mut cfg = ExperimentConfig::new(Strategy::Mds { n: 4, k: 2 }, app, equal(4));
        cfg.c_target = 1;
        cfg.iterations = 1;
        let out = run_experiment(&cfg, &data).unwrap();
        let rec = &out.report.records[0];
        assert_eq!(rec.latency.total, 6.0);
        assert_eq!(rec.workers[2].wasted_rows, 6);
        assert_eq!(rec.workers[3].wasted_rows, 6);
        assert_eq!(out.report.wasted_rows, 12);
    }

    #[test]
    fn basic_with_a_dead_worker() {
        let app = App::GraphFilter { hops: 1 };
        let data = Dataset::synthetic(&app, 12, 12, 1).unwrap();
        let model = SpeedModel::Constant {
            speeds: vec![1.0, 1.0, 1.0, 0.0],
        };
        let mut cfg = ExperimentConfig::new(Strategy::S2c2Basic { n: 4, k: 2 }, app, model);
        cfg.c_target = 3;
        cfg.iterations = 1;
        cfg.predictor = PredictorKind::Oracle;
        let out = run_experiment(&cfg, &data).unwrap();
        let rec = &out.report.records[0];
        assert_eq!(rec.latency.total, 4.0);
        assert_eq!(out.report.wasted_rows, 0);
        for w in 0..3 {
            assert_eq!(rec.workers[w].computed_rows, 4);
        }
        assert!(!rec.mispredicted && !rec.reassigned);
    }

    #[test]
    fn self_normalization_is_one() {
        let app = App::Lr { eta: 0.5 };
        let data = Dataset::synthetic(&app, 60, 10, 3).unwrap();
        let cfg = ExperimentConfig::new(Strategy::Mds { n: 12, k: 10 }, app, equal(12));
        let out = run_experiment(&cfg, &data).unwrap();
        assert_eq!(out.report.records.len(), 15);
        assert_eq!(out.report.normalized_to(&out.report), 1.0);
    }

    #[test]
    fn mismatched_worker_count_names_the_field() {
        let app = App::Lr { eta: 0.5 };
        let data = Dataset::synthetic(&app, 20, 4, 3).unwrap();
        let cfg = ExperimentConfig::new(Strategy::Mds { n: 5, k: 2 }, app, equal(4));
        let err = run_experiment(&cfg, &data).unwrap_err();
        assert!(matches!(err, SimError::Invalid { ref field, .. } if field == "speed_model"));
    }
}
