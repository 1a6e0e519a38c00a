//! Workload runner for `bucket-rbtree`: trace parsing, seeded workload
//! generation, replay with optional validation and oracle shadowing, and a
//! `metric=value` report.

mod run;
mod trace;
mod workload;

pub use run::{report_emit, run_ops, RunOptions, RunReport, ValidateMode};
pub use trace::{format_trace, parse_trace, TraceOp};
pub use workload::{generate_workload, parse_range, Mix, Pattern, WorkloadSpec};

use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("contract violation: {0}")]
    Contract(String),
}

impl BenchError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Parse { .. } | BenchError::Usage(_) | BenchError::Io(_) => 1,
            BenchError::Contract(_) => 3,
        }
    }
}

/// Reads and replays a trace file.
pub fn run_trace(path: &Path, opts: &RunOptions) -> Result<RunReport, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))?;
    run_ops(&parse_trace(&text)?, opts)
}
