//! A simulated cluster that serves an app's products under one strategy.
//!
//! The cluster answers `ComputeEngine` calls. Each call is one round: the
//! timing comes from the round simulators and the numbers come from the
//! actual encoded data of the workers whose results were used.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::apps::{App, AppError, ComputeEngine, Dataset};
use crate::matrix::{matvec, ChunkGrid, DenseMatrix, DenseVector};
use crate::mds::{assemble, chunk_response, mds_decode_chunk, CodedMatrix, DecodeCache, GeneratorMatrix};
use crate::poly::{
    blocks_from_rows, direct_hessian, encode_hessian, hessian_assemble, poly_decode_rows, poly_worker_compute,
    ComputeMode, PolyEncodedPair, PolyScheme,
};
use crate::predictor::{PredictorKind, SpeedPredictor};
use crate::scheduler::{basic_s2c2, ensure_min_live, general_s2c2, quantize_speeds, TimeoutPolicy};

use super::baselines::{over_decomposition_holders, simulate_over_decomposition, simulate_replication, TaskSpec};
use super::cost::CostModel;
use super::events::{EventKind, EventLog};
use super::round::{simulate_round, Latency, RoundSpec, TimeoutSpec, WorkerRound};
use super::speed::SpeedTrace;
use super::{invalid, SimError};

const F64_BYTES: f64 = 8.0;

/// Relative error above which a decoded result is rejected.
pub const VERIFY_TOLERANCE: f64 = 1e-6;

/// A worker counts as a straggler for the basic scheme when its predicted
/// speed is below the fastest divided by this.
pub const STRAGGLER_RATIO: f64 = 5.0;

fn default_r() -> usize {
    3
}
fn default_max_speculative() -> usize {
    6
}
fn default_detect_factor() -> f64 {
    1.5
}
fn default_factor() -> usize {
    4
}
fn default_replication() -> f64 {
    1.42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Strategy {
    /// Each worker holds one plain block and every block is needed.
    Uncoded { n: usize },
    /// Every worker computes its whole coded partition; the first `k` win.
    Mds { n: usize, k: usize },
    /// Stragglers get nothing; the rest split every partition evenly.
    S2c2Basic { n: usize, k: usize },
    /// Chunks handed out in proportion to predicted speed.
    S2c2General { n: usize, k: usize },
    /// Polynomial-coded Hessian, optionally with speed-proportional rows.
    Poly {
        n: usize,
        a: usize,
        b: usize,
        #[serde(default)]
        s2c2: bool,
    },
    /// Uncoded with `r` copies of each block and speculative re-execution.
    Replication {
        n: usize,
        #[serde(default = "default_r")]
        r: usize,
        #[serde(default = "default_max_speculative")]
        max_speculative: usize,
        #[serde(default = "default_detect_factor")]
        detect_factor: f64,
    },
    /// Uncoded with `factor` tasks per worker placed by predicted speed.
    OverDecomposition {
        n: usize,
        #[serde(default = "default_factor")]
        factor: usize,
        #[serde(default = "default_replication")]
        replication: f64,
    },
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Uncoded { .. } => "uncoded",
            Self::Mds { .. } => "mds",
            Self::S2c2Basic { .. } => "s2c2_basic",
            Self::S2c2General { .. } => "s2c2_general",
            Self::Poly { s2c2: false, .. } => "poly",
            Self::Poly { s2c2: true, .. } => "poly_s2c2",
            Self::Replication { .. } => "replication",
            Self::OverDecomposition { .. } => "over_decomposition",
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            Self::Uncoded { n }
            | Self::Mds { n, .. }
            | Self::S2c2Basic { n, .. }
            | Self::S2c2General { n, .. }
            | Self::Poly { n, .. }
            | Self::Replication { n, .. }
            | Self::OverDecomposition { n, .. } => n,
        }
    }

    /// Whether the work split depends on predicted speeds.
    pub fn uses_prediction(&self) -> bool {
        matches!(
            self,
            Self::S2c2Basic { .. } | Self::S2c2General { .. } | Self::Poly { s2c2: true, .. } | Self::OverDecomposition { .. }
        )
    }

    /// Checks parameter ranges. Errors name the offending field relative to
    /// the strategy, e.g. `k`.
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n() == 0 {
            return Err(invalid("n", "must be positive"));
        }
        match *self {
            Self::Mds { n, k } | Self::S2c2Basic { n, k } | Self::S2c2General { n, k } => {
                if k == 0 || k > n {
                    return Err(invalid("k", format!("must be in 1..={n}, got {k}")));
                }
            }
            Self::Poly { n, a, b, .. } => {
                if a == 0 {
                    return Err(invalid("a", "must be positive"));
                }
                if b == 0 {
                    return Err(invalid("b", "must be positive"));
                }
                if a * b > n {
                    return Err(invalid("a", format!("a*b = {} exceeds n = {n}", a * b)));
                }
            }
            Self::Replication { n, r, detect_factor, .. } => {
                if r == 0 || r > n {
                    return Err(invalid("r", format!("must be in 1..={n}, got {r}")));
                }
                if !(detect_factor > 0.0 && detect_factor.is_finite()) {
                    return Err(invalid("detect_factor", "must be positive"));
                }
            }
            Self::OverDecomposition { factor, replication, .. } => {
                if factor == 0 {
                    return Err(invalid("factor", "must be positive"));
                }
                if !(1.0..=2.0).contains(&replication) {
                    return Err(invalid("replication", "must be in [1, 2]"));
                }
            }
            Self::Uncoded { .. } => {}
        }
        Ok(())
    }
}

/// Generator used by the MDS-coded strategies.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorChoice {
    /// Chebyshev Vandermonde up to k = 16, seeded Gaussian above.
    #[default]
    Auto,
    Chebyshev,
    Gaussian,
    /// Explicit `n x k` rows, e.g. a systematic code.
    Custom { rows: Vec<Vec<f64>> },
}

impl GeneratorChoice {
    pub fn build(&self, n: usize, k: usize, seed: u64) -> Result<GeneratorMatrix, SimError> {
        let g = match self {
            Self::Auto if k <= 16 => GeneratorMatrix::vandermonde(n, k, None)?,
            Self::Auto | Self::Gaussian => GeneratorMatrix::gaussian(n, k, seed)?,
            Self::Chebyshev => GeneratorMatrix::vandermonde(n, k, None)?,
            Self::Custom { rows } => GeneratorMatrix::custom(rows)?,
        };
        if g.n != n || g.k != k {
            return Err(invalid(
                "generator",
                format!("generator is {}x{}, strategy needs {n}x{k}", g.n, g.k),
            ));
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSettings {
    pub c_target: usize,
    pub theta: f64,
    pub cost: CostModel,
    pub generator: GeneratorChoice,
    /// Seed for the Gaussian generator.
    pub seed: u64,
    /// Compare every decoded result with the direct product.
    pub verify: bool,
}

impl Default for ClusterSettings {
    fn default() -> Self {
        Self {
            c_target: 20,
            theta: 0.15,
            cost: CostModel::default(),
            generator: GeneratorChoice::Auto,
            seed: 0,
            verify: true,
        }
    }
}

/// Timing facts of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTiming {
    pub latency: Latency,
    pub first_arrivals: Vec<f64>,
    pub deadline: Option<f64>,
    pub timed_out: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// Summed over the iteration's rounds; `response_time` is measured from
    /// the start of the iteration.
    pub workers: Vec<WorkerRound>,
    pub latency: Latency,
    pub mispredicted: bool,
    pub reassigned: bool,
    pub timed_out: bool,
    pub predicted: Vec<f64>,
    pub actual: Vec<f64>,
    pub rounds: Vec<RoundTiming>,
}

/// Work split for the coded strategies in one iteration.
#[derive(Debug, Clone)]
struct Plan {
    m: usize,
    /// Chunks per partition; `None` keeps each matrix's encoding grid.
    c: Option<usize>,
    chunks: Vec<Vec<usize>>,
    timeout: bool,
}

#[derive(Debug)]
enum Plane {
    Coded {
        mats: Vec<CodedMatrix>,
        cache: DecodeCache,
    },
    Tasks {
        mats: Vec<DenseMatrix>,
        /// Per matrix, per task, the workers storing it.
        holders: Vec<Vec<Vec<usize>>>,
    },
    Poly {
        scheme: PolyScheme,
        pairs: Vec<PolyEncodedPair>,
        a: DenseMatrix,
        rows_out: usize,
    },
}

#[derive(Debug)]
struct Current {
    iter: usize,
    speeds: Vec<f64>,
    predicted: Vec<f64>,
    mispredicted: bool,
    plan: Option<Plan>,
    start: f64,
    workers: Vec<WorkerRound>,
    latency: Latency,
    reassigned: bool,
    timed_out: bool,
    rounds: Vec<RoundTiming>,
}

#[derive(Debug)]
pub struct Cluster {
    strategy: Strategy,
    settings: ClusterSettings,
    policy: TimeoutPolicy,
    trace: SpeedTrace,
    predictor: SpeedPredictor,
    plane: Plane,
    log: EventLog,
    clock: f64,
    current: Option<Current>,
}

/// True when some worker's share of the total speed differs from its
/// predicted share by more than `theta` of the predicted share.
pub fn shares_differ(predicted: &[f64], actual: &[f64], theta: f64) -> bool {
    let sp: f64 = predicted.iter().sum();
    let sa: f64 = actual.iter().sum();
    if !(sp > 0.0) || !(sa > 0.0) {
        return (sp > 0.0) != (sa > 0.0);
    }
    predicted.iter().zip(actual).any(|(&p, &a)| {
        let (p, a) = (p / sp, a / sa);
        (a - p).abs() > theta * p
    })
}

fn relative_gap(got: &DenseMatrix, want: &DenseMatrix) -> f64 {
    if got.rows() != want.rows() || got.cols() != want.cols() {
        return f64::INFINITY;
    }
    got.max_abs_diff(want) / want.frobenius_norm().max(f64::MIN_POSITIVE)
}

impl Cluster {
    /// Encodes the app's matrices for `strategy`. `trace` gives the true
    /// speed of every worker in every iteration.
    pub fn new(
        strategy: Strategy,
        app: &App,
        data: &Dataset,
        settings: ClusterSettings,
        trace: SpeedTrace,
        predictor: SpeedPredictor,
    ) -> Result<Self, SimError> {
        strategy.validate()?;
        settings.cost.validate()?;
        if settings.c_target == 0 {
            return Err(invalid("c_target", "must be positive"));
        }
        let policy = TimeoutPolicy::new(settings.theta).map_err(|e| invalid("theta", e.to_string()))?;
        let n = strategy.n();
        if trace.workers() != n {
            return Err(invalid(
                "speed_model",
                format!("{} workers in the speed model, strategy has {n}", trace.workers()),
            ));
        }
        if predictor.history().len() != n {
            return Err(SimError::Config("predictor sized for a different cluster".into()));
        }
        let is_hessian = matches!(app, App::Hessian);
        if is_hessian != matches!(strategy, Strategy::Poly { .. }) {
            return Err(invalid("scheme.kind", "the hessian app runs with the poly scheme and only with it"));
        }
        let c = settings.c_target;
        let plane = match &strategy {
            Strategy::Uncoded { n } => {
                let rows: Vec<Vec<f64>> = (0..*n).map(|i| (0..*n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
                let g = GeneratorMatrix::custom(&rows)?;
                let mats = app
                    .matrices(data)
                    .iter()
                    .map(|m| CodedMatrix::encode(m, g.clone(), c))
                    .collect::<Result<_, _>>()?;
                Plane::Coded {
                    mats,
                    cache: DecodeCache::new(),
                }
            }
            Strategy::Mds { n, k } | Strategy::S2c2Basic { n, k } | Strategy::S2c2General { n, k } => {
                let g = settings.generator.build(*n, *k, settings.seed)?;
                let mats = app
                    .matrices(data)
                    .iter()
                    .map(|m| CodedMatrix::encode(m, g.clone(), c))
                    .collect::<Result<_, _>>()?;
                Plane::Coded {
                    mats,
                    cache: DecodeCache::new(),
                }
            }
            Strategy::Poly { n, a, b, .. } => {
                if a != b {
                    return Err(invalid("scheme.b", "the hessian layout needs b == a"));
                }
                let scheme = PolyScheme::new(*n, *a, *b)?;
                let d_pad = data.a.cols().div_ceil(*a) * a;
                let pairs = encode_hessian(&data.a.pad_cols(d_pad), &scheme)?;
                Plane::Poly {
                    scheme,
                    pairs,
                    a: data.a.clone(),
                    rows_out: d_pad / a,
                }
            }
            Strategy::Replication { .. } => Plane::Tasks {
                mats: app.matrices(data),
                holders: Vec::new(),
            },
            Strategy::OverDecomposition { n, factor, replication } => {
                let mats = app.matrices(data);
                let holders = mats
                    .iter()
                    .map(|_| over_decomposition_holders(n * factor, *n, *replication))
                    .collect();
                Plane::Tasks { mats, holders }
            }
        };
        Ok(Self {
            strategy,
            settings,
            policy,
            trace,
            predictor,
            plane,
            log: EventLog::default(),
            clock: 0.0,
            current: None,
        })
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn log(&self) -> &EventLog {
        &self.log
    }

    pub fn into_log(self) -> EventLog {
        self.log
    }

    /// Fixes this iteration's speeds, predictions and work split.
    pub fn begin_iteration(&mut self, iter: usize) -> Result<(), SimError> {
        if self.current.is_some() {
            return Err(SimError::Config("previous iteration was not finished".into()));
        }
        if iter >= self.trace.iterations() {
            return Err(SimError::Trace(format!(
                "iteration {iter} is past the end of the speed trace ({} iterations)",
                self.trace.iterations()
            )));
        }
        let n = self.strategy.n();
        let speeds = self.trace.at(iter);
        let predicted = match self.predictor.kind() {
            PredictorKind::Oracle => self.predictor.predict(Some(&speeds))?,
            _ if self.predictor.history()[0].is_empty() => vec![1.0; n],
            _ => self.predictor.predict(None)?,
        };
        let mispredicted = self.strategy.uses_prediction() && shares_differ(&predicted, &speeds, self.settings.theta);
        let plan = self.plan(&predicted)?;
        self.log.push(self.clock, None, EventKind::Start, format!("iteration {iter}"));
        self.current = Some(Current {
            iter,
            speeds,
            predicted,
            mispredicted,
            plan,
            start: self.clock,
            workers: vec![WorkerRound::default(); n],
            latency: Latency::default(),
            reassigned: false,
            timed_out: false,
            rounds: Vec::new(),
        });
        Ok(())
    }

    fn plan(&self, predicted: &[f64]) -> Result<Option<Plan>, SimError> {
        let n = self.strategy.n();
        let c_target = self.settings.c_target;
        let proportional = |c_target: usize, m: usize, timeout: bool| -> Result<Plan, SimError> {
            let u = ensure_min_live(&quantize_speeds(predicted, c_target)?, predicted, m)?;
            let asg = general_s2c2(&u, m)?;
            Ok(Plan {
                m,
                c: Some(asg.c),
                chunks: (0..n).map(|w| asg.chunks_of(w)).collect(),
                timeout,
            })
        };
        let plan = match self.strategy {
            Strategy::Uncoded { .. } | Strategy::Mds { .. } => {
                let m = match self.strategy {
                    Strategy::Mds { k, .. } => k,
                    _ => n,
                };
                Plan {
                    m,
                    c: None,
                    chunks: vec![(0..c_target).collect(); n],
                    timeout: false,
                }
            }
            Strategy::S2c2Basic { k, .. } => {
                let fastest = predicted.iter().fold(0.0_f64, |a, &b| a.max(b));
                let mut alive: Vec<bool> = predicted
                    .iter()
                    .map(|&s| s > 0.0 && s * STRAGGLER_RATIO >= fastest)
                    .collect();
                // Too few non-stragglers: bring back the fastest stragglers.
                let mut spare: Vec<usize> = (0..n).filter(|&w| !alive[w] && predicted[w] > 0.0).collect();
                spare.sort_by(|&a, &b| predicted[b].total_cmp(&predicted[a]).then(a.cmp(&b)));
                let short = k.saturating_sub(alive.iter().filter(|&&a| a).count());
                for &w in spare.iter().take(short) {
                    alive[w] = true;
                }
                let asg = basic_s2c2(&alive, k)?;
                Plan {
                    m: k,
                    c: Some(asg.c),
                    chunks: (0..n).map(|w| asg.chunks_of(w)).collect(),
                    timeout: true,
                }
            }
            Strategy::S2c2General { k, .. } => proportional(c_target, k, true)?,
            Strategy::Poly { a, b, s2c2, .. } => {
                let Plane::Poly { rows_out, .. } = &self.plane else {
                    unreachable!("poly strategy always has a poly plane")
                };
                let m = a * b;
                if s2c2 {
                    proportional(c_target.min(*rows_out).max(1), m, true)?
                } else {
                    Plan {
                        m,
                        c: Some(1),
                        chunks: vec![vec![0]; n],
                        timeout: false,
                    }
                }
            }
            Strategy::Replication { .. } | Strategy::OverDecomposition { .. } => return Ok(None),
        };
        Ok(Some(plan))
    }

    /// Closes the iteration, feeds the measured speeds to the predictor and
    /// returns its record.
    pub fn end_iteration(&mut self) -> Result<IterationRecord, SimError> {
        let cur = self
            .current
            .take()
            .ok_or_else(|| SimError::Config("no iteration in progress".into()))?;
        // Virtual-time measurements are exact, and workers that got no work
        // report their speed through a heartbeat, so the predictor sees the
        // true speeds.
        self.predictor.observe(&cur.speeds);
        Ok(IterationRecord {
            iter: cur.iter,
            workers: cur.workers,
            latency: cur.latency,
            mispredicted: cur.mispredicted,
            reassigned: cur.reassigned,
            timed_out: cur.timed_out,
            predicted: cur.predicted,
            actual: cur.speeds,
            rounds: cur.rounds,
        })
    }

    fn absorb(&mut self, workers: &[WorkerRound], timing: RoundTiming, reassigned: bool) -> Result<(), SimError> {
        let cur = self
            .current
            .as_mut()
            .ok_or_else(|| SimError::Config("no iteration in progress".into()))?;
        let offset = self.clock - cur.start;
        for (acc, w) in cur.workers.iter_mut().zip(workers) {
            acc.assigned_rows += w.assigned_rows;
            acc.computed_rows += w.computed_rows;
            acc.used_rows += w.used_rows;
            acc.wasted_rows += w.wasted_rows;
            acc.busy += w.busy;
            if let Some(t) = w.response_time {
                acc.response_time = Some(offset + t);
            }
        }
        cur.latency.add(&timing.latency);
        cur.reassigned |= reassigned;
        cur.timed_out |= timing.timed_out;
        self.clock += timing.latency.total;
        cur.rounds.push(timing);
        Ok(())
    }

    fn coded_matvec(&mut self, id: usize, x: &DenseVector) -> Result<DenseVector, SimError> {
        let cur = self
            .current
            .as_ref()
            .ok_or_else(|| SimError::Config("no iteration in progress".into()))?;
        let plan = cur.plan.as_ref().expect("coded strategies always plan");
        let Plane::Coded { mats, cache } = &mut self.plane else {
            return Err(SimError::Config("this strategy has no coded matrices".into()));
        };
        let coded = mats
            .get(id)
            .ok_or_else(|| AppError::Dataset(format!("no matrix with id {id}")))?;
        let grid = match plan.c {
            Some(c) => ChunkGrid::new(coded.rows_per_partition(), c),
            None => coded.grid.clone(),
        };
        let spec = RoundSpec {
            m: plan.m,
            grid: grid.clone(),
            chunks: plan.chunks.clone(),
            speeds: &cur.speeds,
            timeout: plan.timeout.then_some(TimeoutSpec {
                policy: self.policy,
                believed: &cur.predicted,
            }),
            cost: &self.settings.cost,
            input_bytes: F64_BYTES * x.len() as f64,
            bytes_per_row: F64_BYTES,
            clock: self.clock,
        };
        let out = simulate_round(&spec, &mut self.log)?;
        let mut decoded = BTreeMap::new();
        for (ch, used) in out.used.iter().enumerate() {
            let responses = used
                .iter()
                .map(|&w| chunk_response(&coded.partitions[w], x, &grid, ch))
                .collect::<Result<Vec<_>, _>>()?;
            decoded.insert(ch, mds_decode_chunk(&coded.generator, &responses, cache)?);
        }
        let y = assemble(&decoded, &coded.plan, &grid)?;
        if self.settings.verify {
            let direct = crate::matrix::matvec_full(coded.original(), x)?;
            let err = y.relative_error(&direct);
            if !(err <= VERIFY_TOLERANCE) {
                return Err(SimError::Verification(err));
            }
        }
        let timing = RoundTiming {
            latency: out.latency,
            first_arrivals: out.first_arrivals,
            deadline: out.deadline,
            timed_out: out.timed_out,
        };
        self.absorb(&out.workers, timing, out.reassigned)?;
        Ok(y)
    }

    fn task_matvec(&mut self, id: usize, x: &DenseVector) -> Result<DenseVector, SimError> {
        let cur = self
            .current
            .as_ref()
            .ok_or_else(|| SimError::Config("no iteration in progress".into()))?;
        let Plane::Tasks { mats, holders } = &mut self.plane else {
            return Err(SimError::Config("this strategy has no task matrices".into()));
        };
        let mat = mats
            .get(id)
            .ok_or_else(|| AppError::Dataset(format!("no matrix with id {id}")))?;
        let n = self.strategy.n();
        let tasks = match self.strategy {
            Strategy::OverDecomposition { factor, .. } => n * factor,
            _ => n,
        };
        let spec = TaskSpec {
            grid: ChunkGrid::new(mat.rows(), tasks),
            speeds: &cur.speeds,
            cost: &self.settings.cost,
            input_bytes: F64_BYTES * x.len() as f64,
            bytes_per_row: F64_BYTES,
            clock: self.clock,
        };
        let out = match self.strategy {
            Strategy::Replication {
                r,
                max_speculative,
                detect_factor,
                ..
            } => simulate_replication(&spec, r, max_speculative, detect_factor, &mut self.log)?,
            Strategy::OverDecomposition { .. } => {
                simulate_over_decomposition(&spec, &cur.predicted, &mut holders[id], &mut self.log)?
            }
            _ => unreachable!("only the uncoded baselines use tasks"),
        };
        let mut y = Vec::with_capacity(mat.rows());
        for t in 0..tasks {
            y.extend_from_slice(matvec(mat, x, spec.grid.chunk_rows(t)?)?.as_slice());
        }
        let timing = RoundTiming {
            latency: out.latency,
            first_arrivals: Vec::new(),
            deadline: None,
            timed_out: false,
        };
        let speculated = matches!(self.strategy, Strategy::Replication { .. })
            && out.winner.iter().enumerate().any(|(t, &w)| w != t);
        self.absorb(&out.workers, timing, speculated)?;
        Ok(DenseVector::new(y))
    }

    fn poly_hessian(&mut self, x: &DenseVector) -> Result<DenseMatrix, SimError> {
        let cur = self
            .current
            .as_ref()
            .ok_or_else(|| SimError::Config("no iteration in progress".into()))?;
        let plan = cur.plan.as_ref().expect("poly always plans");
        let Plane::Poly {
            scheme,
            pairs,
            a,
            rows_out,
        } = &self.plane
        else {
            return Err(SimError::Config("this strategy does not compute Hessians".into()));
        };
        if x.len() != a.rows() {
            return Err(AppError::Dataset(format!("weights have length {}, matrix has {} rows", x.len(), a.rows())).into());
        }
        let grid = ChunkGrid::new(*rows_out, plan.c.unwrap_or(1));
        let spec = RoundSpec {
            m: plan.m,
            grid: grid.clone(),
            chunks: plan.chunks.clone(),
            speeds: &cur.speeds,
            timeout: plan.timeout.then_some(TimeoutSpec {
                policy: self.policy,
                believed: &cur.predicted,
            }),
            cost: &self.settings.cost,
            input_bytes: F64_BYTES * x.len() as f64,
            bytes_per_row: F64_BYTES * *rows_out as f64,
            clock: self.clock,
        };
        let out = simulate_round(&spec, &mut self.log)?;
        let mode = ComputeMode::Hessian(x.clone());
        let mut evals = Vec::new();
        for (ch, used) in out.used.iter().enumerate() {
            let rows = grid.chunk_rows(ch)?;
            for &w in used {
                evals.extend(poly_worker_compute(&pairs[w], rows.clone(), &mode)?);
            }
        }
        let decoded = poly_decode_rows(scheme, &evals)?;
        let blocks = blocks_from_rows(&decoded, scheme, *rows_out)?;
        let d = a.cols();
        let h = hessian_assemble(&blocks, scheme.a)?.slice_rows(0..d)?.slice_cols(0..d)?;
        if self.settings.verify {
            let err = relative_gap(&h, &direct_hessian(a, x)?);
            if !(err <= VERIFY_TOLERANCE) {
                return Err(SimError::Verification(err));
            }
        }
        let timing = RoundTiming {
            latency: out.latency,
            first_arrivals: out.first_arrivals,
            deadline: out.deadline,
            timed_out: out.timed_out,
        };
        self.absorb(&out.workers, timing, out.reassigned)?;
        Ok(h)
    }
}

impl ComputeEngine for Cluster {
    type Error = SimError;

    fn matvec(&mut self, id: usize, x: &DenseVector) -> Result<DenseVector, SimError> {
        match self.plane {
            Plane::Coded { .. } => self.coded_matvec(id, x),
            Plane::Tasks { .. } => self.task_matvec(id, x),
            Plane::Poly { .. } => Err(SimError::Config("the poly scheme only computes Hessians".into())),
        }
    }

    fn hessian(&mut self, x: &DenseVector) -> Result<DenseMatrix, SimError> {
        self.poly_hessian(x)
    }
}
