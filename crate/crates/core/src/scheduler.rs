//! S²C² work assignment.
//!
//! Every worker stores a full coded partition split into `C` chunks. The
//! scheduler hands each worker a cyclic interval of chunks sized to its
//! speed so that every chunk is computed by exactly `m` distinct workers,
//! where `m` is the recovery threshold of the code.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{ChunkGrid, MatrixError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchedError {
    #[error("every worker speed is below the dead threshold")]
    AllDead,
    #[error("only {live} live workers for recovery threshold {m}")]
    InsufficientCapacity { live: usize, m: usize },
    #[error("no response times given")]
    EmptyList,
    #[error("chunk {chunk} can reach coverage {reachable} but needs {needed}")]
    Undecodable {
        chunk: usize,
        reachable: usize,
        needed: usize,
    },
    #[error("invalid input: {0}")]
    BadInput(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

/// Quantized per-worker speeds `u_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpeedVector {
    pub u: Vec<usize>,
}

impl SpeedVector {
    pub fn new(u: Vec<usize>) -> Self {
        Self { u }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn total(&self) -> usize {
        self.u.iter().sum()
    }

    pub fn live(&self) -> usize {
        self.u.iter().filter(|&&u| u > 0).count()
    }
}

/// Speeds below this fraction of the fastest count as dead.
pub const DEAD_THRESHOLD: f64 = 1e-6;

/// Rounds `speeds * c_target / sum(speeds)` entry by entry. Speeds below
/// `DEAD_THRESHOLD * max` become 0, and the fastest worker gets at least 1.
/// The total may differ from `c_target` by rounding.
pub fn quantize_speeds(speeds: &[f64], c_target: usize) -> Result<SpeedVector, SchedError> {
    if c_target == 0 {
        return Err(SchedError::BadInput("C_target must be positive".into()));
    }
    if speeds.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(SchedError::BadInput("speeds must be finite and non-negative".into()));
    }
    let max = speeds.iter().fold(0.0_f64, |m, &s| m.max(s));
    if max <= 0.0 {
        return Err(SchedError::AllDead);
    }
    let live: Vec<f64> = speeds
        .iter()
        .map(|&s| if s < DEAD_THRESHOLD * max { 0.0 } else { s })
        .collect();
    let sum: f64 = live.iter().sum();
    // The tolerance keeps exact halves from rounding differently after a
    // rescaling of the inputs.
    let mut u: Vec<usize> = live
        .iter()
        .map(|s| (s * c_target as f64 / sum + 1e-9).round() as usize)
        .collect();
    if u.iter().all(|&x| x == 0) {
        let fastest = (0..u.len())
            .max_by(|&a, &b| live[a].total_cmp(&live[b]).then(b.cmp(&a)))
            .expect("speeds are not empty");
        u[fastest] = 1;
    }
    Ok(SpeedVector { u })
}

/// Makes at least `m` workers live by giving `u = 1` to the fastest workers
/// with `u = 0` and positive speed.
pub fn ensure_min_live(u: &SpeedVector, speeds: &[f64], m: usize) -> Result<SpeedVector, SchedError> {
    let mut u = u.clone();
    let max = speeds.iter().fold(0.0_f64, |a, &s| a.max(s));
    let alive = speeds.iter().filter(|&&s| s > 0.0 && s >= DEAD_THRESHOLD * max).count();
    if alive < m {
        return Err(SchedError::InsufficientCapacity { live: alive, m });
    }
    while u.live() < m {
        let promote = (0..u.len())
            .filter(|&i| u.u[i] == 0 && speeds[i] > 0.0 && speeds[i] >= DEAD_THRESHOLD * max)
            .max_by(|&a, &b| speeds[a].total_cmp(&speeds[b]).then(b.cmp(&a)))
            .ok_or(SchedError::InsufficientCapacity { live: u.live(), m })?;
        u.u[promote] = 1;
    }
    Ok(u)
}

/// A cyclic run of `len` chunks starting at `begin` on a circle of `C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub begin: usize,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    /// Chunks per partition.
    pub c: usize,
    /// Recovery threshold.
    pub m: usize,
    pub intervals: Vec<Interval>,
}

impl Assignment {
    pub fn n(&self) -> usize {
        self.intervals.len()
    }

    /// Chunk indices of `worker` in interval order.
    pub fn chunks_of(&self, worker: usize) -> Vec<usize> {
        let iv = self.intervals[worker];
        (0..iv.len).map(|t| (iv.begin + t) % self.c).collect()
    }

    pub fn chunk_counts(&self) -> Vec<usize> {
        self.intervals.iter().map(|iv| iv.len).collect()
    }

    pub fn total_chunks(&self) -> usize {
        self.intervals.iter().map(|iv| iv.len).sum()
    }

    /// Contiguous local row ranges of `worker`, split where the interval wraps.
    pub fn row_ranges(&self, worker: usize, grid: &ChunkGrid) -> Result<Vec<Range<usize>>, SchedError> {
        let iv = self.intervals[worker];
        if iv.len == 0 {
            return Ok(Vec::new());
        }
        let end = iv.begin + iv.len;
        let mut out = Vec::new();
        let first_end = end.min(self.c);
        out.push(grid.chunk_rows(iv.begin)?.start..grid.chunk_rows(first_end - 1)?.end);
        if end > self.c {
            out.push(grid.chunk_rows(0)?.start..grid.chunk_rows(end - self.c - 1)?.end);
        }
        Ok(out)
    }

    /// Rows assigned to `worker`.
    pub fn rows_of(&self, worker: usize, grid: &ChunkGrid) -> Result<usize, SchedError> {
        Ok(self.row_ranges(worker, grid)?.iter().map(|r| r.len()).sum())
    }

    /// Diagnostic dump: one line per worker with its interval and row ranges.
    pub fn to_csv(&self, grid: &ChunkGrid) -> Result<String, SchedError> {
        let mut out = String::from("worker,chunk_begin,len,rows\n");
        for w in 0..self.n() {
            let ranges: Vec<String> = self
                .row_ranges(w, grid)?
                .iter()
                .map(|r| format!("{}-{}", r.start, r.end))
                .collect();
            let iv = self.intervals[w];
            let _ = writeln!(out, "{w},{},{},{}", iv.begin, iv.len, ranges.join(" "));
        }
        Ok(out)
    }
}

/// Sizes each worker's share of the `m * C` chunk slots by its
/// quantized speed, with `C = sum(u)`.
///
/// Workers are visited fastest first (ties by index). Each takes
/// `floor(u_i * remaining / sum of u over unvisited workers)`, capped at
/// `C`; whatever is not taken stays in `remaining` for the next worker.
/// Shares are laid out as consecutive cyclic intervals.
pub fn general_s2c2(u: &SpeedVector, m: usize) -> Result<Assignment, SchedError> {
    let c = u.total();
    let live = u.live();
    if live < m || (m > 0 && c == 0) {
        return Err(SchedError::InsufficientCapacity { live, m });
    }
    let mut order: Vec<usize> = (0..u.len()).filter(|&i| u.u[i] > 0).collect();
    order.sort_by(|&a, &b| u.u[b].cmp(&u.u[a]).then(a.cmp(&b)));
    let mut intervals = vec![Interval { begin: 0, len: 0 }; u.len()];
    let mut remaining = m * c;
    let mut suffix: usize = order.iter().map(|&i| u.u[i]).sum();
    let mut begin = 0;
    for &i in &order {
        let share = (u.u[i] * remaining / suffix).min(c);
        intervals[i] = Interval { begin, len: share };
        remaining -= share;
        suffix -= u.u[i];
        if c > 0 {
            begin = (begin + share) % c;
        }
    }
    if remaining != 0 {
        return Err(SchedError::InsufficientCapacity { live, m });
    }
    Ok(Assignment { c, m, intervals })
}

/// One unit of speed per live worker: each of the `s` live workers computes
/// `m` of `C = s` chunks.
pub fn basic_s2c2(alive: &[bool], m: usize) -> Result<Assignment, SchedError> {
    let u = SpeedVector::new(alive.iter().map(|&a| usize::from(a)).collect());
    general_s2c2(&u, m)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub per_chunk: Vec<usize>,
    pub decodable: bool,
    /// `(chunk, missing)` for chunks below the threshold.
    pub deficit: Vec<(usize, usize)>,
}

/// Counts distinct workers per chunk from explicit chunk sets.
pub fn coverage_of(c: usize, m: usize, chunk_sets: &[Vec<usize>]) -> CoverageReport {
    let mut per_chunk = vec![0; c];
    let mut seen = vec![usize::MAX; c];
    for (w, set) in chunk_sets.iter().enumerate() {
        for &ch in set.iter().filter(|&&ch| ch < c) {
            if seen[ch] != w {
                seen[ch] = w;
                per_chunk[ch] += 1;
            }
        }
    }
    let deficit: Vec<(usize, usize)> = per_chunk
        .iter()
        .enumerate()
        .filter(|(_, &cov)| cov < m)
        .map(|(ch, &cov)| (ch, m - cov))
        .collect();
    CoverageReport {
        decodable: deficit.is_empty(),
        per_chunk,
        deficit,
    }
}

pub fn verify_coverage(asg: &Assignment) -> CoverageReport {
    let sets: Vec<Vec<usize>> = (0..asg.n()).map(|w| asg.chunks_of(w)).collect();
    coverage_of(asg.c, asg.m, &sets)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeoutPolicy {
    pub theta: f64,
}

impl Default for TimeoutPolicy {
    fn default() -> Self {
        Self { theta: 0.15 }
    }
}

impl TimeoutPolicy {
    pub fn new(theta: f64) -> Result<Self, SchedError> {
        if theta > 0.0 && theta.is_finite() {
            Ok(Self { theta })
        } else {
            Err(SchedError::BadInput(format!("theta must be positive, got {theta}")))
        }
    }
}

/// `(1 + theta)` times the mean of the first `m` response times.
pub fn deadline(first_m_times: &[f64], policy: &TimeoutPolicy) -> Result<f64, SchedError> {
    if first_m_times.is_empty() {
        return Err(SchedError::EmptyList);
    }
    let mean = first_m_times.iter().sum::<f64>() / first_m_times.len() as f64;
    Ok((1.0 + policy.theta) * mean)
}

/// Extra chunks handed to workers that responded in time.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reassignment {
    /// `extra[w]` lists chunks newly assigned to worker `w`.
    pub extra: Vec<Vec<usize>>,
}

impl Reassignment {
    pub fn is_empty(&self) -> bool {
        self.extra.iter().all(Vec::is_empty)
    }

    pub fn total_chunks(&self) -> usize {
        self.extra.iter().map(Vec::len).sum()
    }
}

/// Brings every chunk back to coverage `m` using only `responded` workers.
///
/// A chunk is pending when fewer than `m` responded workers had it in their
/// interval. Each missing slot goes to the eligible responded worker with
/// the smallest `(extra load + 1) / speed`, ties to the faster and then the
/// lower index, so pending work is shared in proportion to measured speed.
/// Any responded worker can take any chunk since it stores a full partition.
pub fn reassign_pending(
    asg: &Assignment,
    responded: &[usize],
    measured_speeds: &[f64],
) -> Result<Reassignment, SchedError> {
    let sets: Vec<Vec<usize>> = (0..asg.n()).map(|w| asg.chunks_of(w)).collect();
    reassign_from_sets(asg.c, asg.m, &sets, responded, measured_speeds)
}

/// `reassign_pending` over explicit per-worker chunk sets.
pub fn reassign_from_sets(
    c: usize,
    m: usize,
    chunk_sets: &[Vec<usize>],
    responded: &[usize],
    measured_speeds: &[f64],
) -> Result<Reassignment, SchedError> {
    let n = chunk_sets.len();
    if measured_speeds.len() != n {
        return Err(SchedError::BadInput(format!(
            "expected {n} speeds, got {}",
            measured_speeds.len()
        )));
    }
    let responded: BTreeSet<usize> = responded.iter().copied().filter(|&w| w < n).collect();
    let mut owns = vec![vec![false; c]; n];
    for &w in &responded {
        for &ch in chunk_sets[w].iter().filter(|&&ch| ch < c) {
            owns[w][ch] = true;
        }
    }
    let mut extra = vec![Vec::new(); n];
    let mut load = vec![0usize; n];
    for ch in 0..c {
        let have = responded.iter().filter(|&&w| owns[w][ch]).count();
        if have >= m {
            continue;
        }
        let eligible: Vec<usize> = responded.iter().copied().filter(|&w| !owns[w][ch]).collect();
        let need = m - have;
        if eligible.len() < need {
            return Err(SchedError::Undecodable {
                chunk: ch,
                reachable: have + eligible.len(),
                needed: m,
            });
        }
        for _ in 0..need {
            let cost = |w: usize| (load[w] + 1) as f64 / measured_speeds[w].max(f64::MIN_POSITIVE);
            let w = eligible
                .iter()
                .copied()
                .filter(|&w| !owns[w][ch])
                .min_by(|&a, &b| {
                    cost(a)
                        .total_cmp(&cost(b))
                        .then(measured_speeds[b].total_cmp(&measured_speeds[a]))
                        .then(a.cmp(&b))
                })
                .expect("eligible workers were counted above");
            owns[w][ch] = true;
            load[w] += 1;
            extra[w].push(ch);
        }
    }
    Ok(Reassignment { extra })
}
