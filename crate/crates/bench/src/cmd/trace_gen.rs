use std::path::Path;

use sscc_core::sim::{gen_speed_trace, SpeedTrace, TraceParams};

use crate::{write_file, CliError};

/// Writes a generated trace as `iter,worker,speed` CSV.
pub fn cmd_trace_gen(params: &TraceParams, seed: u64, out: &Path) -> Result<SpeedTrace, CliError> {
    let trace = gen_speed_trace(params, seed)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
    }
    write_file(out, &trace.to_csv())?;
    Ok(trace)
}
