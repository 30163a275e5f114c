//! Timing of the uncoded baselines.
//!
//! Both split the original rows into tasks and need every task once.
//! - Replication: one task per worker, each stored on `r` consecutive
//!   workers. Tasks still running at `detect_factor` times the median
//!   completion time get a speculative copy on an idle replica holder, or
//!   on any idle worker after shipping the rows.
//! - Over-decomposition: `factor` tasks per worker, some stored twice,
//!   placed each iteration by predicted finish time; running a task away
//!   from its data pays the migration cost.

use crate::matrix::ChunkGrid;
use crate::scheduler::DEAD_THRESHOLD;

use super::cost::CostModel;
use super::events::{EventKind, EventLog};
use super::round::{Latency, WorkerRound};
use super::SimError;

#[derive(Debug, Clone)]
pub struct TaskSpec<'a> {
    /// Tasks over the original rows.
    pub grid: ChunkGrid,
    pub speeds: &'a [f64],
    pub cost: &'a CostModel,
    pub input_bytes: f64,
    pub bytes_per_row: f64,
    pub clock: f64,
}

#[derive(Debug, Clone)]
pub struct TaskOutcome {
    pub workers: Vec<WorkerRound>,
    pub latency: Latency,
    /// Worker whose result was used for each task.
    pub winner: Vec<usize>,
}

#[derive(Debug, Clone)]
struct Run {
    worker: usize,
    task: usize,
    rows: usize,
    start: f64,
    compute_end: f64,
    arrival: f64,
    comm: f64,
}

fn measured(run: &Run, cost: &CostModel) -> f64 {
    let busy = run.compute_end - run.start;
    if busy > 0.0 && busy.is_finite() {
        run.rows as f64 * cost.row_cost / busy
    } else {
        0.0
    }
}

pub fn simulate_replication(
    spec: &TaskSpec<'_>,
    r: usize,
    max_speculative: usize,
    detect_factor: f64,
    log: &mut EventLog,
) -> Result<TaskOutcome, SimError> {
    let n = spec.speeds.len();
    if spec.grid.chunks_per_partition != n {
        return Err(SimError::Config("replication needs one task per worker".into()));
    }
    let inbound = spec.cost.message(spec.input_bytes);
    let mut runs: Vec<Run> = Vec::with_capacity(n);
    for p in 0..n {
        let rows = spec.grid.chunk_rows(p)?.len();
        let compute_end = inbound + spec.cost.compute(rows, spec.speeds[p]);
        let outbound = spec.cost.message(rows as f64 * spec.bytes_per_row);
        runs.push(Run {
            worker: p,
            task: p,
            rows,
            start: inbound,
            compute_end,
            arrival: compute_end + outbound,
            comm: inbound + outbound,
        });
    }
    let mut sorted: Vec<f64> = runs.iter().map(|r| r.arrival).collect();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[(n - 1) / 2];
    let detect = detect_factor * median;
    let mut late: Vec<usize> = (0..n).filter(|&p| runs[p].arrival > detect).collect();
    late.sort_by(|&a, &b| runs[b].arrival.total_cmp(&runs[a].arrival).then(a.cmp(&b)));
    let mut idle: Vec<bool> = (0..n).map(|w| runs[w].arrival <= detect).collect();
    let control = spec.cost.message(0.0);
    if detect.is_finite() && !late.is_empty() {
        log.push(spec.clock + detect, None, EventKind::Timeout, format!("detect {detect:.6}"));
    }
    for &p in late.iter().take(max_speculative) {
        if !detect.is_finite() {
            break;
        }
        let pick = |cands: &mut dyn Iterator<Item = usize>| {
            cands
                .filter(|&w| idle[w])
                .max_by(|&a, &b| measured(&runs[a], spec.cost).total_cmp(&measured(&runs[b], spec.cost)).then(b.cmp(&a)))
        };
        let holders = (1..r).map(|d| (p + d) % n);
        let (w, ship) = match pick(&mut holders.into_iter()) {
            Some(w) => (w, 0.0),
            None => match pick(&mut (0..n)) {
                Some(w) => (w, spec.cost.migration_seconds_per_row * runs[p].rows as f64),
                None => continue,
            },
        };
        idle[w] = false;
        let rows = runs[p].rows;
        let start = detect + control + ship;
        let compute_end = start + spec.cost.compute(rows, spec.speeds[w]);
        let outbound = spec.cost.message(rows as f64 * spec.bytes_per_row);
        let kind = if ship > 0.0 { EventKind::Migrate } else { EventKind::Speculate };
        log.push(spec.clock + detect, Some(w), kind, format!("task {p}"));
        runs.push(Run {
            worker: w,
            task: p,
            rows,
            start,
            compute_end,
            arrival: compute_end + outbound,
            comm: control + outbound,
        });
    }

    let mut winner_run = vec![usize::MAX; n];
    for (i, run) in runs.iter().enumerate() {
        let cur = winner_run[run.task];
        if cur == usize::MAX || run.arrival < runs[cur].arrival {
            winner_run[run.task] = i;
        }
    }
    let critical = (0..n)
        .map(|p| winner_run[p])
        .max_by(|&a, &b| runs[a].arrival.total_cmp(&runs[b].arrival).then(b.cmp(&a)))
        .expect("at least one task");
    let end = runs[critical].arrival;
    if !end.is_finite() {
        return Err(SimError::Undecodable("a task has no live copy".into()));
    }
    let mut workers = vec![WorkerRound::default(); n];
    for (i, run) in runs.iter().enumerate() {
        let stats = &mut workers[run.worker];
        stats.assigned_rows += run.rows;
        log.push(spec.clock + run.start, Some(run.worker), EventKind::Start, format!("task {}", run.task));
        if winner_run[run.task] == i {
            stats.computed_rows += run.rows;
            stats.used_rows += run.rows;
            stats.busy += run.compute_end - run.start;
            stats.response_time = Some(stats.response_time.map_or(run.arrival, |t: f64| t.max(run.arrival)));
            log.push(spec.clock + run.compute_end, Some(run.worker), EventKind::ComputeDone, "");
            log.push(spec.clock + run.arrival, Some(run.worker), EventKind::Arrive, format!("task {}", run.task));
        } else {
            let stop = runs[winner_run[run.task]].arrival;
            let done = if run.compute_end <= stop {
                run.rows
            } else {
                spec.cost.rows_done(stop - run.start, run.rows, spec.speeds[run.worker])
            };
            stats.computed_rows += done;
            stats.wasted_rows += done;
            stats.busy += (run.compute_end.min(stop) - run.start).max(0.0);
            log.push(spec.clock + stop, Some(run.worker), EventKind::Cancel, format!("rows done {done}"));
        }
    }
    let comm = runs[critical].comm;
    log.push(spec.clock + end, None, EventKind::Decoded, "uncoded");
    Ok(TaskOutcome {
        workers,
        latency: Latency {
            compute: (end - comm).max(0.0),
            comm,
            decode: 0.0,
            total: end,
        },
        winner: winner_run.iter().map(|&i| runs[i].worker).collect(),
    })
}

/// Initial data placement: task `t` lives on worker `t % n`, and an evenly
/// spread `replication - 1` fraction of tasks also on the next worker.
pub fn over_decomposition_holders(tasks: usize, n: usize, replication: f64) -> Vec<Vec<usize>> {
    let copies = (((replication - 1.0).max(0.0) * tasks as f64).round() as usize).min(tasks);
    (0..tasks)
        .map(|t| {
            let mut h = vec![t % n];
            let copied = (t + 1) * copies / tasks > t * copies / tasks;
            if copied && n > 1 {
                h.push((t + 1) % n);
            }
            h
        })
        .collect()
}

/// Places tasks by predicted finish time and runs them. Tasks that migrate
/// leave a copy at their new worker in `holders`.
pub fn simulate_over_decomposition(
    spec: &TaskSpec<'_>,
    believed: &[f64],
    holders: &mut [Vec<usize>],
    log: &mut EventLog,
) -> Result<TaskOutcome, SimError> {
    let n = spec.speeds.len();
    let tasks = spec.grid.chunks_per_partition;
    let max_belief = believed.iter().fold(0.0_f64, |a, &b| a.max(b));
    let usable: Vec<usize> = (0..n).filter(|&w| believed[w] > DEAD_THRESHOLD * max_belief).collect();
    if usable.is_empty() {
        return Err(SimError::Undecodable("no worker is believed alive".into()));
    }
    let mut plan: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut load = vec![0.0_f64; n];
    for t in 0..tasks {
        let rows = spec.grid.chunk_rows(t)?.len();
        let ship = spec.cost.migration_seconds_per_row * rows as f64;
        let finish = |w: usize| {
            let move_cost = if holders[t].contains(&w) { 0.0 } else { ship };
            load[w] + move_cost + spec.cost.compute(rows, believed[w])
        };
        let w = usable
            .iter()
            .copied()
            .min_by(|&a, &b| finish(a).total_cmp(&finish(b)).then(a.cmp(&b)))
            .expect("usable is not empty");
        load[w] = finish(w);
        plan[w].push(t);
    }
    let inbound = spec.cost.message(spec.input_bytes);
    let mut workers = vec![WorkerRound::default(); n];
    let mut winner = vec![usize::MAX; tasks];
    let mut end = 0.0_f64;
    let mut critical_comm = 0.0;
    for (w, list) in plan.iter().enumerate() {
        if list.is_empty() {
            continue;
        }
        let mut t_now = inbound;
        let mut rows_total = 0;
        let mut shipped = 0.0;
        log.push(spec.clock + inbound, Some(w), EventKind::Start, format!("tasks {}", list.len()));
        for &t in list {
            let rows = spec.grid.chunk_rows(t)?.len();
            if !holders[t].contains(&w) {
                let ship = spec.cost.migration_seconds_per_row * rows as f64;
                log.push(spec.clock + t_now, Some(w), EventKind::Migrate, format!("task {t}"));
                t_now += ship;
                shipped += ship;
                holders[t].push(w);
            }
            let busy = spec.cost.compute(rows, spec.speeds[w]);
            workers[w].busy += busy;
            t_now += busy;
            rows_total += rows;
            winner[t] = w;
        }
        let outbound = spec.cost.message(rows_total as f64 * spec.bytes_per_row);
        let arrival = t_now + outbound;
        let stats = &mut workers[w];
        stats.assigned_rows = rows_total;
        stats.computed_rows = rows_total;
        stats.used_rows = rows_total;
        stats.response_time = Some(arrival);
        if arrival.is_finite() {
            log.push(spec.clock + t_now, Some(w), EventKind::ComputeDone, "");
            log.push(spec.clock + arrival, Some(w), EventKind::Arrive, format!("tasks {}", list.len()));
        }
        if arrival > end || (arrival == end && arrival.is_finite()) {
            end = arrival;
            critical_comm = inbound + outbound + shipped;
        }
    }
    if !end.is_finite() {
        return Err(SimError::Undecodable("a worker holding tasks never finishes".into()));
    }
    log.push(spec.clock + end, None, EventKind::Decoded, "uncoded");
    Ok(TaskOutcome {
        workers,
        latency: Latency {
            compute: (end - critical_comm).max(0.0),
            comm: critical_comm,
            decode: 0.0,
            total: end,
        },
        winner,
    })
}
