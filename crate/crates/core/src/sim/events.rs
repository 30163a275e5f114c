//! Debug log of simulated events.

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// A worker received its input and starts computing.
    Start,
    ComputeDone,
    /// A worker's result reached the master.
    Arrive,
    Timeout,
    Reassign,
    Speculate,
    Migrate,
    /// Work still running when the master finished the round.
    Cancel,
    Decoded,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::Start => "start",
            Self::ComputeDone => "compute_done",
            Self::Arrive => "arrive",
            Self::Timeout => "timeout",
            Self::Reassign => "reassign",
            Self::Speculate => "speculate",
            Self::Migrate => "migrate",
            Self::Cancel => "cancel",
            Self::Decoded => "decoded",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub time: f64,
    /// `None` for master events.
    pub worker: Option<usize>,
    pub kind: EventKind,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EventLog {
    pub events: Vec<Event>,
}

impl EventLog {
    pub fn push(&mut self, time: f64, worker: Option<usize>, kind: EventKind, detail: impl Into<String>) {
        self.events.push(Event {
            time,
            worker,
            kind,
            detail: detail.into(),
        });
    }

    /// CSV with header `time,worker,event,detail`; master events leave the
    /// worker column empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,worker,event,detail\n");
        for e in &self.events {
            let worker = e.worker.map(|w| w.to_string()).unwrap_or_default();
            let _ = writeln!(out, "{:.16e},{worker},{},{}", e.time, e.kind, e.detail.replace(',', ";"));
        }
        out
    }
}
