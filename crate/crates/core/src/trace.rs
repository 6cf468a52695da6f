//! Standard Workload Format (SWF) traces.
//!
//! Only fields 1 (job number), 4 (run time) and 5 (allocated processors)
//! are read. Each retained job becomes a bag of tasks: by default one task
//! per allocated processor, each carrying the full run time as work on a
//! 1 GHz reference core, with a deadline of `alpha` times the run time on a
//! 2 GHz core.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{build_workload, Job, ModelError, PmSpec, Workload};

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("alpha must be at least 1, got {0}")]
    InvalidAlpha(u32),
    #[error("workload holds {available} tasks, {requested} requested")]
    NotEnoughTasks { requested: usize, available: usize },
    #[error("task count must be at least 1")]
    ZeroTasks,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawTraceJob {
    pub job_number: u64,
    /// Seconds.
    pub runtime: f64,
    pub processors: u32,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SwfTrace {
    pub jobs: Vec<RawTraceJob>,
    /// Data lines dropped for a non-positive run time or processor count.
    pub dropped: usize,
    pub data_lines: usize,
    pub comment_lines: usize,
}

pub fn parse_swf<R: BufRead>(reader: R) -> Result<SwfTrace, TraceError> {
    let mut trace = SwfTrace::default();
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        let number = index + 1;
        let text = line.trim_start();
        if text.starts_with(';') {
            trace.comment_lines += 1;
            continue;
        }
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() < 5 {
            return Err(TraceError::MalformedLine {
                line: number,
                reason: format!("expected at least 5 fields, found {}", fields.len()),
            });
        }
        let field = |position: usize| -> Result<f64, TraceError> {
            fields[position]
                .parse::<f64>()
                .map_err(|_| TraceError::MalformedLine {
                    line: number,
                    reason: format!(
                        "field {} is not a number: {:?}",
                        position + 1,
                        fields[position]
                    ),
                })
        };
        let job_number = fields[0]
            .parse::<u64>()
            .map_err(|_| TraceError::MalformedLine {
                line: number,
                reason: format!("job number is not an unsigned integer: {:?}", fields[0]),
            })?;
        let runtime = field(3)?;
        let processors = field(4)?;
        trace.data_lines += 1;
        if runtime > 0.0
            && runtime.is_finite()
            && processors >= 1.0
            && processors <= u32::MAX as f64
        {
            trace.jobs.push(RawTraceJob {
                job_number,
                runtime,
                processors: processors as u32,
            });
        } else {
            trace.dropped += 1;
        }
    }
    Ok(trace)
}

pub fn parse_swf_str(text: &str) -> Result<SwfTrace, TraceError> {
    parse_swf(text.as_bytes())
}

/// Writes 18-field SWF lines; fields other than 1, 4 and 5 are `-1`
/// except submit and wait time, which are 0.
pub fn write_swf<W: Write>(jobs: &[RawTraceJob], mut out: W) -> io::Result<()> {
    writeln!(out, "; Version: 2.2")?;
    for job in jobs {
        write!(
            out,
            "{} 0 0 {} {}",
            job.job_number, job.runtime, job.processors
        )?;
        for _ in 5..18 {
            write!(out, " -1")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// How a trace job decomposes into tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskMapping {
    /// One task per allocated processor.
    #[default]
    PerProcessor,
    /// One task per job.
    PerJob,
}

/// Deadline of a job that runs `runtime` seconds on a 1 GHz core.
pub fn trace_deadline(runtime: f64, alpha: u32) -> f64 {
    f64::from(alpha) * (runtime / 2.0)
}

pub fn to_workload(
    raw: &[RawTraceJob],
    alpha: u32,
    mapping: TaskMapping,
) -> Result<Workload, TraceError> {
    if alpha < 1 {
        return Err(TraceError::InvalidAlpha(alpha));
    }
    let jobs = raw
        .iter()
        .map(|job| {
            let tasks = match mapping {
                TaskMapping::PerProcessor => job.processors as usize,
                TaskMapping::PerJob => 1,
            };
            Job::new(
                job.job_number,
                trace_deadline(job.runtime, alpha),
                &vec![job.runtime; tasks],
            )
        })
        .collect();
    Ok(build_workload(jobs)?)
}

/// Keeps the first `n` tasks in workload order, cutting the last job short.
pub fn truncate_tasks(workload: &Workload, n: usize) -> Result<Workload, TraceError> {
    if n == 0 {
        return Err(TraceError::ZeroTasks);
    }
    if workload.total_tasks() < n {
        return Err(TraceError::NotEnoughTasks {
            requested: n,
            available: workload.total_tasks(),
        });
    }
    let mut remaining = n;
    let mut jobs = Vec::new();
    for job in workload.jobs() {
        if remaining == 0 {
            break;
        }
        let mut job = job.clone();
        job.tasks.truncate(remaining);
        remaining -= job.tasks.len();
        jobs.push(job);
    }
    Ok(build_workload(jobs)?)
}

/// A PM fleet replicated `scale_factor` times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetConfig {
    pub pms: Vec<PmSpec>,
    pub scale_factor: u32,
}

/// Copies of the whole fleet, one after another, renumbered `1..`.
pub fn scale_fleet(config: &FleetConfig) -> Vec<PmSpec> {
    (0..config.scale_factor)
        .flat_map(|_| config.pms.iter())
        .enumerate()
        .map(|(position, pm)| PmSpec::new(position + 1, pm.core_count, pm.core_capacity))
        .collect()
}
