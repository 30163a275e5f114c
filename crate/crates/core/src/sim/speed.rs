//! Per-worker, per-iteration speed models.
//!
//! Speeds are in rows per second at unit row cost and are constant within
//! an iteration.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SimError;

/// A materialized speed table, `speeds[worker][iter]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedTrace {
    pub speeds: Vec<Vec<f64>>,
}

impl SpeedTrace {
    pub fn workers(&self) -> usize {
        self.speeds.len()
    }

    pub fn iterations(&self) -> usize {
        self.speeds.first().map_or(0, Vec::len)
    }

    /// Speeds of every worker at `iter`.
    pub fn at(&self, iter: usize) -> Vec<f64> {
        self.speeds.iter().map(|s| s[iter]).collect()
    }

    /// CSV with header `iter,worker,speed`, iteration-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,worker,speed\n");
        for t in 0..self.iterations() {
            for (w, s) in self.speeds.iter().enumerate() {
                let _ = writeln!(out, "{t},{w},{:.16e}", s[t]);
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, SimError> {
        let mut rows: Vec<(usize, usize, f64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with("iter") {
                continue;
            }
            let bad = || SimError::Trace(format!("line {}: expected iter,worker,speed", lineno + 1));
            let mut f = line.split(',').map(str::trim);
            let (Some(t), Some(w), Some(s), None) = (f.next(), f.next(), f.next(), f.next()) else {
                return Err(bad());
            };
            let t: usize = t.parse().map_err(|_| bad())?;
            let w: usize = w.parse().map_err(|_| bad())?;
            let s: f64 = s.parse().map_err(|_| bad())?;
            if !s.is_finite() || s < 0.0 {
                return Err(SimError::Trace(format!("line {}: speed must be non-negative", lineno + 1)));
            }
            rows.push((t, w, s));
        }
        let iters = rows.iter().map(|r| r.0 + 1).max().unwrap_or(0);
        let workers = rows.iter().map(|r| r.1 + 1).max().unwrap_or(0);
        if rows.len() != iters * workers {
            return Err(SimError::Trace(format!(
                "expected {} entries for {workers} workers x {iters} iterations, got {}",
                iters * workers,
                rows.len()
            )));
        }
        let mut speeds = vec![vec![f64::NAN; iters]; workers];
        for (t, w, s) in rows {
            if !speeds[w][t].is_nan() {
                return Err(SimError::Trace(format!("duplicate entry for iter {t}, worker {w}")));
            }
            speeds[w][t] = s;
        }
        Ok(Self { speeds })
    }

    pub fn read(path: &Path) -> Result<Self, SimError> {
        let text = fs::read_to_string(path).map_err(|e| SimError::Trace(format!("{}: {e}", path.display())))?;
        Self::from_csv(&text)
    }
}

/// Divides the speed of `worker` by `factor` for iterations in `start..end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Injection {
    pub worker: usize,
    pub factor: f64,
    pub start: usize,
    pub end: usize,
}

fn default_min_level() -> f64 {
    0.2
}

/// Piecewise-constant speeds with multiplicative noise.
///
/// Each worker starts at its base speed. Every iteration, with probability
/// `change_prob`, it moves to a new level `base * U(min_level, 1)`. The
/// reported speed is the level times `U(1 - noise, 1 + noise)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceParams {
    pub base: Vec<f64>,
    pub iterations: usize,
    pub noise: f64,
    pub change_prob: f64,
    #[serde(default = "default_min_level")]
    pub min_level: f64,
    #[serde(default)]
    pub injections: Vec<Injection>,
}

impl TraceParams {
    pub fn uniform(workers: usize, iterations: usize, speed: f64) -> Self {
        Self {
            base: vec![speed; workers],
            iterations,
            noise: 0.0,
            change_prob: 0.0,
            min_level: default_min_level(),
            injections: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Trace(m.to_string()));
        if self.base.is_empty() || self.iterations == 0 {
            return bad("need at least one worker and one iteration");
        }
        if self.base.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
            return bad("base speeds must be positive");
        }
        if !(0.0..1.0).contains(&self.noise) {
            return bad("noise must be in [0, 1)");
        }
        if !(0.0..=1.0).contains(&self.change_prob) {
            return bad("change_prob must be in [0, 1]");
        }
        if !(self.min_level > 0.0 && self.min_level <= 1.0) {
            return bad("min_level must be in (0, 1]");
        }
        validate_injections(&self.injections, self.base.len())
    }
}

fn validate_injections(injections: &[Injection], workers: usize) -> Result<(), SimError> {
    for inj in injections {
        if inj.worker >= workers || !(inj.factor > 0.0) || inj.start > inj.end {
            return Err(SimError::Trace(format!("invalid injection {inj:?}")));
        }
    }
    Ok(())
}

fn apply_injections(speeds: &mut [Vec<f64>], injections: &[Injection]) {
    for inj in injections {
        let row = &mut speeds[inj.worker];
        let end = inj.end.min(row.len());
        for s in row.iter_mut().take(end).skip(inj.start) {
            *s /= inj.factor;
        }
    }
}

pub fn gen_speed_trace(params: &TraceParams, seed: u64) -> Result<SpeedTrace, SimError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.base.len();
    let mut level = params.base.clone();
    let mut speeds = vec![Vec::with_capacity(params.iterations); n];
    for _ in 0..params.iterations {
        for w in 0..n {
            if params.change_prob > 0.0 && rng.random::<f64>() < params.change_prob {
                level[w] = params.base[w] * rng.random_range(params.min_level..=1.0);
            }
            let jitter = if params.noise > 0.0 {
                rng.random_range(1.0 - params.noise..=1.0 + params.noise)
            } else {
                1.0
            };
            speeds[w].push(level[w] * jitter);
        }
    }
    apply_injections(&mut speeds, &params.injections);
    Ok(SpeedTrace { speeds })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpeedModel {
    /// One fixed speed per worker.
    Constant { speeds: Vec<f64> },
    /// Fixed speeds with slowdowns on chosen workers and iterations.
    StragglerInjection {
        base: Vec<f64>,
        injections: Vec<Injection>,
    },
    /// Generated by `gen_speed_trace`.
    Stochastic {
        #[serde(flatten)]
        params: TraceParams,
        seed: u64,
    },
    /// A table loaded from a trace file.
    Trace { trace: SpeedTrace },
}

impl SpeedModel {
    pub fn workers(&self) -> usize {
        match self {
            Self::Constant { speeds } => speeds.len(),
            Self::StragglerInjection { base, .. } => base.len(),
            Self::Stochastic { params, .. } => params.base.len(),
            Self::Trace { trace } => trace.workers(),
        }
    }

    /// The speeds for `iterations` iterations.
    pub fn materialize(&self, iterations: usize) -> Result<SpeedTrace, SimError> {
        let constant = |base: &[f64]| -> Result<Vec<Vec<f64>>, SimError> {
            if base.is_empty() || base.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
                return Err(SimError::Trace("speeds must be finite and non-negative".into()));
            }
            Ok(base.iter().map(|&s| vec![s; iterations]).collect())
        };
        let trace = match self {
            Self::Constant { speeds } => SpeedTrace { speeds: constant(speeds)? },
            Self::StragglerInjection { base, injections } => {
                validate_injections(injections, base.len())?;
                let mut speeds = constant(base)?;
                apply_injections(&mut speeds, injections);
                SpeedTrace { speeds }
            }
            Self::Stochastic { params, seed } => {
                let p = TraceParams {
                    iterations,
                    ..params.clone()
                };
                gen_speed_trace(&p, *seed)?
            }
            Self::Trace { trace } => {
                if trace.iterations() < iterations {
                    return Err(SimError::Trace(format!(
                        "trace has {} iterations, experiment needs {iterations}",
                        trace.iterations()
                    )));
                }
                SpeedTrace {
                    speeds: trace.speeds.iter().map(|s| s[..iterations].to_vec()).collect(),
                }
            }
        };
        Ok(trace)
    }
}

/// The seeded trace family used to compare predictors: 10 workers of base
/// speed 100, 10% noise and a 5% chance of a level change per iteration.
pub fn synthetic_family(iterations: usize) -> TraceParams {
    TraceParams {
        base: vec![100.0; 10],
        iterations,
        noise: 0.1,
        change_prob: 0.05,
        min_level: 0.2,
        injections: Vec::new(),
    }
}
