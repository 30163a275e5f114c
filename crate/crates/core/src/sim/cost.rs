//! Virtual-time costs of computing and messaging.

use serde::{Deserialize, Serialize};

use super::SimError;

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModel {
    /// Seconds per row at unit speed.
    #[serde(default = "one")]
    pub row_cost: f64,
    /// Fixed cost of every message.
    pub per_message_latency: f64,
    /// Link bandwidth; `None` means transfers are free.
    pub bytes_per_second: Option<f64>,
    /// Master time spent decoding each chunk.
    pub decode_seconds_per_chunk: f64,
    /// Time to ship one row of stored data to another worker.
    #[serde(default = "one")]
    pub migration_seconds_per_row: f64,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            row_cost: 1.0,
            per_message_latency: 0.0,
            bytes_per_second: None,
            decode_seconds_per_chunk: 0.0,
            migration_seconds_per_row: 1.0,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<(), SimError> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !(self.row_cost > 0.0 && self.row_cost.is_finite())
            || !ok(self.per_message_latency)
            || !ok(self.decode_seconds_per_chunk)
            || !ok(self.migration_seconds_per_row)
            || self.bytes_per_second.is_some_and(|b| !(b > 0.0))
        {
            return Err(SimError::Config("cost model values must be non-negative (row_cost and bandwidth positive)".into()));
        }
        Ok(())
    }

    /// Time to deliver one message of `bytes` bytes.
    pub fn message(&self, bytes: f64) -> f64 {
        self.per_message_latency + self.bytes_per_second.map_or(0.0, |b| bytes / b)
    }

    /// Time for a worker of speed `speed` to compute `rows` rows.
    pub fn compute(&self, rows: usize, speed: f64) -> f64 {
        if rows == 0 {
            0.0
        } else if speed > 0.0 {
            rows as f64 * self.row_cost / speed
        } else {
            f64::INFINITY
        }
    }

    /// Whole rows finished after `elapsed` seconds, capped at `rows`.
    pub fn rows_done(&self, elapsed: f64, rows: usize, speed: f64) -> usize {
        if !(elapsed > 0.0) || !(speed > 0.0) {
            return 0;
        }
        ((elapsed * speed / self.row_cost).floor() as usize).min(rows)
    }
}
