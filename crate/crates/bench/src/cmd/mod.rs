mod report;
mod run;
mod trace_gen;
mod train;

pub use report::{cmd_report, latency_table, waste_table, ReportFiles, ReportInput, LATENCY_COLUMNS, WASTE_TABLE_COLUMNS};
pub use run::{cmd_run, execute, RunFiles, RunResults};
pub use trace_gen::cmd_trace_gen;
pub use train::{cmd_train, evaluate_predictors, read_traces, MapeRow, TrainFiles};
