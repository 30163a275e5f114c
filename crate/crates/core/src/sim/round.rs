//! Timing of one coded product.
//!
//! Every worker with work receives the input vector, computes its chunks
//! and returns them in one message. The master takes messages in arrival
//! order and keeps the first `m` distinct workers per chunk. With a timeout
//! policy, once `m` workers have answered the master waits until
//! `(1 + theta)` times their mean response time; if some chunk is still
//! short it hands the missing chunks to workers that already answered and
//! keeps collecting until every chunk is covered.

use serde::{Deserialize, Serialize};

use crate::matrix::ChunkGrid;
use crate::scheduler::{deadline, reassign_from_sets, TimeoutPolicy, DEAD_THRESHOLD};

use super::cost::CostModel;
use super::events::{EventKind, EventLog};
use super::SimError;

#[derive(Debug, Clone)]
pub struct TimeoutSpec<'a> {
    pub policy: TimeoutPolicy,
    /// The master's belief about each worker's speed, used to share out
    /// pending chunks among idle workers.
    pub believed: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct RoundSpec<'a> {
    pub m: usize,
    pub grid: ChunkGrid,
    /// Chunks each worker is asked to compute.
    pub chunks: Vec<Vec<usize>>,
    /// True speeds for this iteration.
    pub speeds: &'a [f64],
    pub timeout: Option<TimeoutSpec<'a>>,
    pub cost: &'a CostModel,
    pub input_bytes: f64,
    pub bytes_per_row: f64,
    /// Absolute clock at the start of the round, for the event log.
    pub clock: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Latency {
    pub compute: f64,
    pub comm: f64,
    pub decode: f64,
    pub total: f64,
}

impl Latency {
    pub fn add(&mut self, other: &Latency) {
        self.compute += other.compute;
        self.comm += other.comm;
        self.decode += other.decode;
        self.total += other.total;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WorkerRound {
    pub assigned_rows: usize,
    pub computed_rows: usize,
    pub used_rows: usize,
    pub wasted_rows: usize,
    /// Seconds spent computing.
    pub busy: f64,
    /// Arrival of the worker's last message used by the master.
    pub response_time: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RoundOutcome {
    /// Per chunk, the workers whose results decode it, in arrival order.
    pub used: Vec<Vec<usize>>,
    pub workers: Vec<WorkerRound>,
    pub latency: Latency,
    /// Arrival times of the first `m` original responses.
    pub first_arrivals: Vec<f64>,
    pub deadline: Option<f64>,
    pub timed_out: bool,
    pub reassigned: bool,
}

#[derive(Debug, Clone)]
struct Job {
    worker: usize,
    chunks: Vec<usize>,
    rows: usize,
    start: f64,
    compute_end: f64,
    arrival: f64,
    comm: f64,
    extra: bool,
}

fn make_job(
    spec: &RoundSpec<'_>,
    worker: usize,
    chunks: Vec<usize>,
    ready: f64,
    inbound: f64,
    extra: bool,
) -> Result<Job, SimError> {
    let mut rows = 0;
    for &ch in &chunks {
        rows += spec.grid.chunk_rows(ch)?.len();
    }
    let compute_end = ready + spec.cost.compute(rows, spec.speeds[worker]);
    let outbound = spec.cost.message(rows as f64 * spec.bytes_per_row);
    Ok(Job {
        worker,
        chunks,
        rows,
        start: ready,
        compute_end,
        arrival: compute_end + outbound,
        comm: inbound + outbound,
        extra,
    })
}

fn chunk_list(chunks: &[usize]) -> String {
    chunks.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn simulate_round(spec: &RoundSpec<'_>, log: &mut EventLog) -> Result<RoundOutcome, SimError> {
    let n = spec.chunks.len();
    let c = spec.grid.chunks_per_partition;
    let m = spec.m;
    if spec.speeds.len() != n {
        return Err(SimError::Config(format!("{} speeds for {n} workers", spec.speeds.len())));
    }
    let inbound = spec.cost.message(spec.input_bytes);
    let mut jobs: Vec<Job> = Vec::new();
    for (w, chunks) in spec.chunks.iter().enumerate() {
        if !chunks.is_empty() {
            jobs.push(make_job(spec, w, chunks.clone(), inbound, inbound, false)?);
        }
    }
    let mut processed = vec![false; jobs.len()];
    let mut used: Vec<Vec<usize>> = vec![Vec::new(); c];
    let mut short = if m == 0 { 0 } else { c };
    let mut first_arrivals: Vec<f64> = Vec::new();
    let mut deadline_at: Option<f64> = None;
    let mut timed_out = false;
    let mut reassigned = false;
    let mut now = 0.0_f64;
    let mut critical: Option<usize> = None;
    let mut workers = vec![WorkerRound::default(); n];
    let mut wasted_in_used = vec![0usize; n];
    let mut used_rows = vec![0usize; n];

    while short > 0 {
        let next = (0..jobs.len()).filter(|&j| !processed[j]).min_by(|&a, &b| {
            let (ja, jb) = (&jobs[a], &jobs[b]);
            ja.arrival
                .total_cmp(&jb.arrival)
                .then(ja.extra.cmp(&jb.extra))
                .then(ja.worker.cmp(&jb.worker))
        });
        let next_time = next.map_or(f64::INFINITY, |j| jobs[j].arrival);

        if let (Some(t), false) = (&spec.timeout, timed_out) {
            let fire_at = match deadline_at {
                Some(d) => Some(d),
                None if next_time.is_infinite() && !first_arrivals.is_empty() => {
                    Some(deadline(&first_arrivals, &t.policy)?.max(now))
                }
                None => None,
            };
            // A deadline earlier than the latest arrival fires on arrival.
            if let Some(d) = fire_at.map(|d| d.max(now)).filter(|&d| next_time > d) {
                timed_out = true;
                log.push(spec.clock + d, None, EventKind::Timeout, format!("deadline {d:.6}"));
                let max_belief = t.believed.iter().fold(0.0_f64, |a, &b| a.max(b));
                let mut measured = t.believed.to_vec();
                let mut sets = vec![Vec::new(); n];
                let mut responded = Vec::new();
                for (j, job) in jobs.iter().enumerate() {
                    if processed[j] {
                        responded.push(job.worker);
                        sets[job.worker] = job.chunks.clone();
                        let busy = job.compute_end - job.start;
                        if busy > 0.0 {
                            measured[job.worker] = job.rows as f64 * spec.cost.row_cost / busy;
                        }
                    }
                }
                for w in 0..n {
                    if spec.chunks[w].is_empty() && t.believed[w] > DEAD_THRESHOLD * max_belief {
                        responded.push(w);
                    }
                }
                responded.sort_unstable();
                let delta = reassign_from_sets(c, m, &sets, &responded, &measured)?;
                for (w, extra) in delta.extra.into_iter().enumerate() {
                    if extra.is_empty() {
                        continue;
                    }
                    reassigned = true;
                    log.push(spec.clock + d, Some(w), EventKind::Reassign, format!("chunks {}", chunk_list(&extra)));
                    let control = spec.cost.message(0.0);
                    jobs.push(make_job(spec, w, extra, d + control, control, true)?);
                    processed.push(false);
                }
                continue;
            }
        }

        let Some(j) = next.filter(|_| next_time.is_finite()) else {
            let missing: Vec<usize> = (0..c).filter(|&ch| used[ch].len() < m).collect();
            return Err(SimError::Undecodable(format!(
                "chunks {} can never reach {m} responses",
                chunk_list(&missing)
            )));
        };
        processed[j] = true;
        let job = &jobs[j];
        now = job.arrival;
        critical = Some(j);
        for &ch in &job.chunks {
            let rows = spec.grid.chunk_rows(ch)?.len();
            if used[ch].len() < m && !used[ch].contains(&job.worker) {
                used[ch].push(job.worker);
                used_rows[job.worker] += rows;
                if used[ch].len() == m {
                    short -= 1;
                }
            } else {
                wasted_in_used[job.worker] += rows;
            }
        }
        if !job.extra && first_arrivals.len() < m {
            first_arrivals.push(job.arrival);
            if first_arrivals.len() == m {
                if let Some(t) = &spec.timeout {
                    deadline_at = Some(deadline(&first_arrivals, &t.policy)?);
                }
            }
        }
    }

    let end = now;
    for (j, job) in jobs.iter().enumerate() {
        let w = &mut workers[job.worker];
        w.assigned_rows += job.rows;
        let speed = spec.speeds[job.worker];
        log.push(spec.clock + job.start, Some(job.worker), EventKind::Start, format!("rows {}", job.rows));
        if processed[j] {
            w.computed_rows += job.rows;
            w.busy += job.compute_end - job.start;
            w.response_time = Some(w.response_time.map_or(job.arrival, |r: f64| r.max(job.arrival)));
            log.push(spec.clock + job.compute_end, Some(job.worker), EventKind::ComputeDone, "");
            log.push(
                spec.clock + job.arrival,
                Some(job.worker),
                EventKind::Arrive,
                format!("chunks {}", chunk_list(&job.chunks)),
            );
        } else {
            let done = if job.compute_end <= end {
                job.rows
            } else {
                spec.cost.rows_done(end - job.start, job.rows, speed)
            };
            w.computed_rows += done;
            w.wasted_rows += done;
            w.busy += (job.compute_end.min(end) - job.start).max(0.0);
            if job.compute_end <= end {
                log.push(spec.clock + job.compute_end, Some(job.worker), EventKind::ComputeDone, "");
            }
            log.push(spec.clock + end, Some(job.worker), EventKind::Cancel, format!("rows done {done}"));
        }
    }
    for (w, stats) in workers.iter_mut().enumerate() {
        stats.used_rows = used_rows[w];
        stats.wasted_rows += wasted_in_used[w];
    }
    let decode = spec.cost.decode_seconds_per_chunk * c as f64;
    let comm = critical.map_or(0.0, |j| jobs[j].comm);
    log.push(spec.clock + end + decode, None, EventKind::Decoded, format!("chunks {c}"));
    Ok(RoundOutcome {
        used,
        workers,
        latency: Latency {
            compute: (end - comm).max(0.0),
            comm,
            decode,
            total: end + decode,
        },
        first_arrivals,
        deadline: deadline_at,
        timed_out,
        reassigned,
    })
}
