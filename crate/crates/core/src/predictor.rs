//! Per-worker speed prediction.
//!
//! Speeds are measured as rows computed per second. Three predictors are
//! provided: the last observed value, an AR(1) model fitted per worker and
//! a single-layer LSTM with a 4-dimensional hidden state whose weights are
//! shared across workers while each worker keeps its own recurrent state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PredictError {
    #[error("response time must be positive, got {0}")]
    NonPositiveTime(f64),
    #[error("series too short: need at least {need}, got {got}")]
    TooShort { need: usize, got: usize },
    #[error("actual value at index {0} is zero")]
    ZeroActual(usize),
    #[error("length mismatch: {0} predictions for {1} actual values")]
    LengthMismatch(usize, usize),
    #[error("worker {0} has no speed history")]
    EmptyHistory(usize),
    #[error("the oracle predictor needs the true next speeds")]
    MissingOracle,
    #[error("invalid training config: {0}")]
    BadConfig(String),
}

/// Rows per second.
pub fn measure_speed(rows: usize, t: f64) -> Result<f64, PredictError> {
    if t > 0.0 {
        Ok(rows as f64 / t)
    } else {
        Err(PredictError::NonPositiveTime(t))
    }
}

/// Mean absolute percentage error, in percent.
pub fn mape(pred: &[f64], actual: &[f64]) -> Result<f64, PredictError> {
    if pred.len() != actual.len() {
        return Err(PredictError::LengthMismatch(pred.len(), actual.len()));
    }
    if let Some(i) = actual.iter().position(|&a| a == 0.0) {
        return Err(PredictError::ZeroActual(i));
    }
    if actual.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = pred.iter().zip(actual).map(|(p, a)| ((p - a) / a).abs()).sum();
    Ok(100.0 * total / actual.len() as f64)
}

/// `s[t+1] = mu + phi * (s[t] - mu)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ar1Model {
    pub mu: f64,
    pub phi: f64,
}

impl Ar1Model {
    /// Sample mean and lag-1 autocorrelation, clamped to `[-1, 1]`.
    pub fn fit(series: &[f64]) -> Result<Self, PredictError> {
        if series.len() < 2 {
            return Err(PredictError::TooShort {
                need: 2,
                got: series.len(),
            });
        }
        let n = series.len() as f64;
        let mu = series.iter().sum::<f64>() / n;
        let var: f64 = series.iter().map(|s| (s - mu).powi(2)).sum();
        let cov: f64 = series.windows(2).map(|w| (w[0] - mu) * (w[1] - mu)).sum();
        let phi = if var > 0.0 { (cov / var).clamp(-1.0, 1.0) } else { 0.0 };
        Ok(Self { mu, phi })
    }

    pub fn predict(&self, s_t: f64) -> f64 {
        self.mu + self.phi * (s_t - self.mu)
    }
}

pub const HIDDEN: usize = 4;
const GATES: usize = 4;
const GATE_I: usize = 0;
const GATE_F: usize = 1;
const GATE_O: usize = 2;
const GATE_G: usize = 3;

/// Weights of the cell. Gates are ordered input, forget, output, candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmWeights {
    /// Input weights, `w[gate][unit]` (input dimension 1).
    pub w: [[f64; HIDDEN]; GATES],
    /// Recurrent weights, `u[gate][unit][from]`.
    pub u: [[[f64; HIDDEN]; HIDDEN]; GATES],
    pub b: [[f64; HIDDEN]; GATES],
    pub wy: [f64; HIDDEN],
    pub by: f64,
}

impl LstmWeights {
    pub const LEN: usize = GATES * HIDDEN + GATES * HIDDEN * HIDDEN + GATES * HIDDEN + HIDDEN + 1;

    pub fn zeros() -> Self {
        Self {
            w: [[0.0; HIDDEN]; GATES],
            u: [[[0.0; HIDDEN]; HIDDEN]; GATES],
            b: [[0.0; HIDDEN]; GATES],
            wy: [0.0; HIDDEN],
            by: 0.0,
        }
    }

    fn slots_mut(&mut self) -> Vec<&mut f64> {
        let mut out: Vec<&mut f64> = Vec::with_capacity(Self::LEN);
        out.extend(self.w.iter_mut().flatten());
        out.extend(self.u.iter_mut().flatten().flatten());
        out.extend(self.b.iter_mut().flatten());
        out.extend(self.wy.iter_mut());
        out.push(&mut self.by);
        out
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut copy = self.clone();
        copy.slots_mut().into_iter().map(|v| *v).collect()
    }

    pub fn from_flat(flat: &[f64]) -> Self {
        assert_eq!(flat.len(), Self::LEN);
        let mut out = Self::zeros();
        for (slot, &v) in out.slots_mut().into_iter().zip(flat) {
            *slot = v;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmModel {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub weights: LstmWeights,
    /// Speeds are divided by this before entering the cell and outputs are
    /// multiplied by it.
    pub scale: f64,
    pub train_mape: Option<f64>,
    pub test_mape: Option<f64>,
}

impl LstmModel {
    pub fn new(weights: LstmWeights, scale: f64) -> Self {
        Self {
            input_dim: 1,
            hidden_dim: HIDDEN,
            weights,
            scale,
            train_mape: None,
            test_mape: None,
        }
    }

    /// Uniform in `[-0.5, 0.5] / sqrt(HIDDEN)`.
    pub fn random(seed: u64, scale: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bound = 0.5 / (HIDDEN as f64).sqrt();
        let flat: Vec<f64> = (0..LstmWeights::LEN)
            .map(|_| rng.random_range(-bound..=bound))
            .collect();
        Self::new(LstmWeights::from_flat(&flat), scale)
    }

    pub fn normalize(&self, speed: f64) -> f64 {
        speed / self.scale
    }

    pub fn denormalize(&self, y: f64) -> f64 {
        y * self.scale
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LstmState {
    pub h: [f64; HIDDEN],
    pub c: [f64; HIDDEN],
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Everything the backward pass needs from one step.
struct StepCache {
    x: f64,
    h_prev: [f64; HIDDEN],
    c_prev: [f64; HIDDEN],
    gates: [[f64; HIDDEN]; GATES],
    tanh_c: [f64; HIDDEN],
    h: [f64; HIDDEN],
}

fn forward(wt: &LstmWeights, state: &LstmState, x: f64) -> (LstmState, f64, StepCache) {
    let mut gates = [[0.0; HIDDEN]; GATES];
    for (g, gate) in gates.iter_mut().enumerate() {
        for (r, out) in gate.iter_mut().enumerate() {
            let z = wt.w[g][r] * x
                + wt.b[g][r]
                + (0..HIDDEN).map(|s| wt.u[g][r][s] * state.h[s]).sum::<f64>();
            *out = if g == GATE_G { z.tanh() } else { sigmoid(z) };
        }
    }
    let mut next = LstmState::default();
    let mut tanh_c = [0.0; HIDDEN];
    for r in 0..HIDDEN {
        next.c[r] = gates[GATE_F][r] * state.c[r] + gates[GATE_I][r] * gates[GATE_G][r];
        tanh_c[r] = next.c[r].tanh();
        next.h[r] = gates[GATE_O][r] * tanh_c[r];
    }
    let y = wt.by + (0..HIDDEN).map(|r| wt.wy[r] * next.h[r]).sum::<f64>();
    let cache = StepCache {
        x,
        h_prev: state.h,
        c_prev: state.c,
        gates,
        tanh_c,
        h: next.h,
    };
    (next, y, cache)
}

/// Advances `state` by one normalized input and returns the de-normalized
/// prediction of the next speed.
pub fn lstm_step(model: &LstmModel, state: &LstmState, x: f64) -> (LstmState, f64) {
    let (next, y, _) = forward(&model.weights, state, x);
    (next, model.denormalize(y))
}

/// Mean squared error over `inputs[t] -> targets[t]` (normalized units)
/// starting from `state`, and its gradient by backpropagation through time.
/// Also returns the state after the last input.
pub fn loss_and_grad(
    wt: &LstmWeights,
    state: &LstmState,
    inputs: &[f64],
    targets: &[f64],
) -> (f64, LstmWeights, LstmState) {
    assert_eq!(inputs.len(), targets.len());
    let steps = inputs.len();
    let mut caches = Vec::with_capacity(steps);
    let mut errs = Vec::with_capacity(steps);
    let mut s = *state;
    let mut loss = 0.0;
    for (&x, &target) in inputs.iter().zip(targets) {
        let (next, y, cache) = forward(wt, &s, x);
        loss += (y - target).powi(2);
        errs.push(y - target);
        caches.push(cache);
        s = next;
    }
    let norm = steps.max(1) as f64;
    loss /= norm;

    let mut grad = LstmWeights::zeros();
    let mut dh_next = [0.0; HIDDEN];
    let mut dc_next = [0.0; HIDDEN];
    for (cache, err) in caches.iter().zip(&errs).rev() {
        let dy = 2.0 * err / norm;
        grad.by += dy;
        let mut dh = [0.0; HIDDEN];
        for r in 0..HIDDEN {
            grad.wy[r] += dy * cache.h[r];
            dh[r] = dy * wt.wy[r] + dh_next[r];
        }
        let gi = &cache.gates[GATE_I];
        let gf = &cache.gates[GATE_F];
        let go = &cache.gates[GATE_O];
        let gg = &cache.gates[GATE_G];
        let mut dz = [[0.0; HIDDEN]; GATES];
        for r in 0..HIDDEN {
            let d_o = dh[r] * cache.tanh_c[r];
            let dc = dh[r] * go[r] * (1.0 - cache.tanh_c[r].powi(2)) + dc_next[r];
            dz[GATE_I][r] = dc * gg[r] * gi[r] * (1.0 - gi[r]);
            dz[GATE_F][r] = dc * cache.c_prev[r] * gf[r] * (1.0 - gf[r]);
            dz[GATE_O][r] = d_o * go[r] * (1.0 - go[r]);
            dz[GATE_G][r] = dc * gi[r] * (1.0 - gg[r].powi(2));
            dc_next[r] = dc * gf[r];
        }
        dh_next = [0.0; HIDDEN];
        for g in 0..GATES {
            for r in 0..HIDDEN {
                grad.w[g][r] += dz[g][r] * cache.x;
                grad.b[g][r] += dz[g][r];
                for s in 0..HIDDEN {
                    grad.u[g][r][s] += dz[g][r] * cache.h_prev[s];
                    dh_next[s] += wt.u[g][r][s] * dz[g][r];
                }
            }
        }
    }
    (loss, grad, s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub grad_clip: f64,
    pub seed: u64,
    pub train_fraction: f64,
    /// Truncation length for backpropagation through time.
    pub window: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            learning_rate: 0.05,
            grad_clip: 1.0,
            seed: 7,
            train_fraction: 0.8,
            window: 20,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), PredictError> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(PredictError::BadConfig(format!(
                "train_fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if !(self.learning_rate > 0.0) || !(self.grad_clip > 0.0) || self.window == 0 {
            return Err(PredictError::BadConfig(
                "learning_rate, grad_clip and window must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Number of leading samples of a trace of length `len` used for training.
    pub fn split_point(&self, len: usize) -> usize {
        ((len as f64 * self.train_fraction).round() as usize).clamp(1, len.saturating_sub(1))
    }
}

/// Minimum combined trace length accepted by `lstm_train`.
pub const MIN_TRAIN_LEN: usize = 20;

/// Trains the shared LSTM on one-step-ahead prediction over every trace.
///
/// Each trace is split in time at `train_fraction`; the leading part is used
/// for training and the trailing part for the recorded test MAPE.
/// Training runs plain gradient descent on windows of `window` steps with
/// the recurrent state carried between windows, clipping the gradient norm.
pub fn lstm_train(traces: &[Vec<f64>], cfg: &TrainConfig) -> Result<LstmModel, PredictError> {
    cfg.validate()?;
    let total: usize = traces.iter().map(Vec::len).sum();
    if total < MIN_TRAIN_LEN || traces.iter().any(|t| t.len() < 2) {
        return Err(PredictError::TooShort {
            need: MIN_TRAIN_LEN,
            got: total,
        });
    }
    let train_parts: Vec<&[f64]> = traces.iter().map(|t| &t[..cfg.split_point(t.len())]).collect();
    let scale = train_parts
        .iter()
        .flat_map(|t| t.iter())
        .fold(0.0_f64, |m, &s| m.max(s));
    if !(scale > 0.0) {
        return Err(PredictError::BadConfig("training speeds are all zero".into()));
    }
    let mut model = LstmModel::random(cfg.seed, scale);
    let normalized: Vec<Vec<f64>> = train_parts
        .iter()
        .map(|t| t.iter().map(|s| s / scale).collect())
        .collect();
    for _ in 0..cfg.epochs {
        for series in &normalized {
            let mut state = LstmState::default();
            let inputs = &series[..series.len() - 1];
            let targets = &series[1..];
            let mut start = 0;
            while start < inputs.len() {
                let end = (start + cfg.window).min(inputs.len());
                let (_, grad, next) = loss_and_grad(&model.weights, &state, &inputs[start..end], &targets[start..end]);
                let mut g = grad.to_flat();
                let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > cfg.grad_clip {
                    let f = cfg.grad_clip / norm;
                    g.iter_mut().for_each(|v| *v *= f);
                }
                let mut p = model.weights.to_flat();
                for (p, g) in p.iter_mut().zip(&g) {
                    *p -= cfg.learning_rate * g;
                }
                model.weights = LstmWeights::from_flat(&p);
                state = next;
                start = end;
            }
        }
    }
    let (train, test) = evaluate_split(traces, cfg, |series| lstm_one_step(&model, series))?;
    model.train_mape = Some(train);
    model.test_mape = Some(test);
    Ok(model)
}

/// One-step-ahead LSTM predictions: element `t` predicts `series[t + 1]`.
pub fn lstm_one_step(model: &LstmModel, series: &[f64]) -> Vec<f64> {
    let mut state = LstmState::default();
    series[..series.len().saturating_sub(1)]
        .iter()
        .map(|&s| {
            let (next, y) = lstm_step(model, &state, model.normalize(s));
            state = next;
            y
        })
        .collect()
}

/// Train and test MAPE of one-step predictions made by `predict` over each
/// whole trace, split at `cfg.split_point`.
pub fn evaluate_split(
    traces: &[Vec<f64>],
    cfg: &TrainConfig,
    mut predict: impl FnMut(&[f64]) -> Vec<f64>,
) -> Result<(f64, f64), PredictError> {
    let (mut tr_p, mut tr_a, mut te_p, mut te_a) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for series in traces {
        let split = cfg.split_point(series.len());
        let preds = predict(series);
        for (t, p) in preds.into_iter().enumerate() {
            let target = t + 1;
            if target < split {
                tr_p.push(p);
                tr_a.push(series[target]);
            } else {
                te_p.push(p);
                te_a.push(series[target]);
            }
        }
    }
    Ok((mape(&tr_p, &tr_a)?, mape(&te_p, &te_a)?))
}

/// One-step AR(1) predictions from a model fitted on the training part.
pub fn ar1_one_step(series: &[f64], cfg: &TrainConfig) -> Result<Vec<f64>, PredictError> {
    let model = Ar1Model::fit(&series[..cfg.split_point(series.len()).max(2)])?;
    Ok(series[..series.len().saturating_sub(1)]
        .iter()
        .map(|&s| model.predict(s))
        .collect())
}

pub fn last_value_one_step(series: &[f64]) -> Vec<f64> {
    series[..series.len().saturating_sub(1)].to_vec()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictorKind {
    LastValue,
    Ar1,
    Lstm,
    Oracle,
}

/// Online predictor for a cluster of `n` workers.
///
/// `observe` feeds one iteration of measured speeds; `predict` returns the
/// predicted speeds for the next iteration.
#[derive(Debug, Clone)]
pub struct SpeedPredictor {
    kind: PredictorKind,
    history: Vec<Vec<f64>>,
    lstm: Option<LstmModel>,
    states: Vec<LstmState>,
    lstm_next: Vec<f64>,
}

impl SpeedPredictor {
    pub fn new(kind: PredictorKind, n: usize) -> Self {
        Self {
            kind,
            history: vec![Vec::new(); n],
            lstm: None,
            states: vec![LstmState::default(); n],
            lstm_next: vec![0.0; n],
        }
    }

    pub fn with_lstm(model: LstmModel, n: usize) -> Self {
        Self {
            lstm: Some(model),
            ..Self::new(PredictorKind::Lstm, n)
        }
    }

    pub fn kind(&self) -> PredictorKind {
        self.kind
    }

    pub fn history(&self) -> &[Vec<f64>] {
        &self.history
    }

    pub fn states(&self) -> &[LstmState] {
        &self.states
    }

    pub fn observe(&mut self, speeds: &[f64]) {
        assert_eq!(speeds.len(), self.history.len());
        for (h, &s) in self.history.iter_mut().zip(speeds) {
            h.push(s);
        }
        if let Some(model) = &self.lstm {
            for (w, &s) in speeds.iter().enumerate() {
                let (next, y) = lstm_step(model, &self.states[w], model.normalize(s));
                self.states[w] = next;
                self.lstm_next[w] = y;
            }
        }
    }

    /// `oracle` must hold the true next speeds for the oracle kind and is
    /// ignored otherwise.
    pub fn predict(&self, oracle: Option<&[f64]>) -> Result<Vec<f64>, PredictError> {
        if self.kind == PredictorKind::Oracle {
            return oracle.map(<[f64]>::to_vec).ok_or(PredictError::MissingOracle);
        }
        predict_next(self.kind, &self.history, |w| self.lstm_next[w])
    }
}

/// Predicts each worker's next speed from its history. `lstm_output(w)` is
/// the LSTM prediction already computed for worker `w` (used for the LSTM
/// kind only). AR(1) falls back to the last value until two samples exist.
pub fn predict_next(
    kind: PredictorKind,
    histories: &[Vec<f64>],
    lstm_output: impl Fn(usize) -> f64,
) -> Result<Vec<f64>, PredictError> {
    histories
        .iter()
        .enumerate()
        .map(|(w, h)| {
            let last = *h.last().ok_or(PredictError::EmptyHistory(w))?;
            Ok(match kind {
                PredictorKind::LastValue => last,
                PredictorKind::Ar1 if h.len() >= 2 => Ar1Model::fit(h)?.predict(last),
                PredictorKind::Ar1 => last,
                PredictorKind::Lstm => lstm_output(w).max(0.0),
                PredictorKind::Oracle => return Err(PredictError::MissingOracle),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speed_is_rows_over_time() {
        assert_eq!(measure_speed(300, 1.5).unwrap(), 200.0);
        assert_eq!(measure_speed(0, 2.0).unwrap(), 0.0);
        assert_eq!(measure_speed(5, 0.0), Err(PredictError::NonPositiveTime(0.0)));
    }

    #[test]
    fn mape_examples() {
        assert!((mape(&[90.0, 110.0], &[100.0, 100.0]).unwrap() - 10.0).abs() < 1e-12);
        assert_eq!(mape(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert_eq!(mape(&[1.0], &[0.0]), Err(PredictError::ZeroActual(0)));
        assert_eq!(mape(&[1.0], &[1.0, 2.0]), Err(PredictError::LengthMismatch(1, 2)));
    }

    #[test]
    fn ar1_constant_and_alternating() {
        let m = Ar1Model::fit(&[5.0, 5.0, 5.0]).unwrap();
        assert_eq!((m.mu, m.phi), (5.0, 0.0));
        assert_eq!(m.predict(5.0), 5.0);
        let alt: Vec<f64> = (0..10).map(|i| if i % 2 == 0 { 1.0 } else { 2.0 }).collect();
        let m = Ar1Model::fit(&alt).unwrap();
        // deviations are +-0.5: 9 lag products of -0.25 over 10 squares of 0.25
        assert!((m.mu - 1.5).abs() < 1e-15);
        assert!((m.phi + 0.9).abs() < 1e-12);
        assert!(m.predict(2.0) < 1.5);
        assert!(matches!(Ar1Model::fit(&[1.0]), Err(PredictError::TooShort { .. })));
    }

    #[test]
    fn zero_weights() {
        let model = LstmModel::new(LstmWeights::zeros(), 1.0);
        let (s, y) = lstm_step(&model, &LstmState::default(), 0.7);
        assert_eq!(y, 0.0);
        assert_eq!(s.h, [0.0; HIDDEN]);
        let mut w = LstmWeights::zeros();
        w.by = 3.0;
        let (_, y) = lstm_step(&LstmModel::new(w, 1.0), &LstmState::default(), 0.7);
        assert_eq!(y, 3.0);
    }

    #[test]
    fn flat_round_trip() {
        let m = LstmModel::random(3, 1.0);
        let flat = m.weights.to_flat();
        assert_eq!(flat.len(), LstmWeights::LEN);
        assert_eq!(LstmWeights::from_flat(&flat), m.weights);
        let bound = 0.5 / 2.0;
        assert!(flat.iter().all(|v| v.abs() <= bound));
    }

    #[test]
    fn normalization_round_trips() {
        let m = LstmModel::random(1, 37.5);
        for s in [0.0, 1.0, 12.25, 37.5, 80.0] {
            assert!((m.denormalize(m.normalize(s)) - s).abs() <= 1e-12 * s.max(1.0));
        }
    }

    #[test]
    fn json_round_trip() {
        let m = LstmModel::random(9, 12.0);
        let back = LstmModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn predict_next_kinds() {
        let h = vec![vec![1.0, 7.0], vec![3.0]];
        assert_eq!(predict_next(PredictorKind::LastValue, &h, |_| 0.0).unwrap(), vec![7.0, 3.0]);
        assert_eq!(predict_next(PredictorKind::Lstm, &h, |w| w as f64 + 0.5).unwrap(), vec![0.5, 1.5]);
        assert_eq!(
            predict_next(PredictorKind::LastValue, &[vec![]], |_| 0.0),
            Err(PredictError::EmptyHistory(0))
        );
        let p = SpeedPredictor::new(PredictorKind::Oracle, 2);
        assert_eq!(p.predict(Some(&[4.0, 5.0])).unwrap(), vec![4.0, 5.0]);
        assert_eq!(p.predict(None), Err(PredictError::MissingOracle));
    }

    #[test]
    fn train_config_validation() {
        let mut cfg = TrainConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.train_fraction = 1.0;
        assert!(cfg.validate().is_err());
        assert_eq!(TrainConfig::default().split_point(100), 80);
    }
}
