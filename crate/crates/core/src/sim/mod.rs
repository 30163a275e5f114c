//! Deterministic virtual-time simulation of a coded master/worker cluster.

pub mod baselines;
pub mod cluster;
pub mod cost;
pub mod events;
pub mod experiment;
pub mod round;
pub mod speed;

use thiserror::Error;

use crate::apps::AppError;
use crate::matrix::MatrixError;
use crate::mds::CodecError;
use crate::predictor::PredictError;
use crate::scheduler::SchedError;

pub use cluster::{Cluster, ClusterSettings, GeneratorChoice, IterationRecord, RoundTiming, Strategy};
pub use cost::CostModel;
pub use events::{Event, EventKind, EventLog};
pub use experiment::{run_experiment, wasted_rows, ExperimentConfig, ExperimentOutput, MetricsReport, WasteCount};
pub use round::{simulate_round, Latency, RoundOutcome, RoundSpec, TimeoutSpec, WorkerRound};
pub use speed::{gen_speed_trace, synthetic_family, Injection, SpeedModel, SpeedTrace, TraceParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("speed trace: {0}")]
    Trace(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    /// A configuration value out of range; `field` is its key path.
    #[error("invalid value for {field}: {message}")]
    Invalid { field: String, message: String },
    #[error("undecodable: {0}")]
    Undecodable(String),
    #[error("decoded result differs from the direct product (relative error {0:e})")]
    Verification(f64),
    #[error(transparent)]
    Sched(#[from] SchedError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Predict(#[from] PredictError),
    #[error(transparent)]
    App(#[from] AppError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

impl SimError {
    /// True when the run failed because too few results could be gathered.
    pub fn is_undecodable(&self) -> bool {
        matches!(
            self,
            Self::Undecodable(_)
                | Self::Sched(SchedError::InsufficientCapacity { .. } | SchedError::Undecodable { .. } | SchedError::AllDead)
                | Self::Codec(CodecError::InsufficientResponses { .. })
        )
    }
}

pub(crate) fn invalid(field: &str, message: impl Into<String>) -> SimError {
    SimError::Invalid {
        field: field.to_string(),
        message: message.into(),
    }
}
