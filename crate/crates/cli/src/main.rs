//! `hysched`: run the hybrid cloud schedulers on SWF traces.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hybrid_sched::Algorithm;

mod commands;
mod error;
mod experiment;

#[derive(Debug, Parser)]
#[command(
    name = "hysched",
    version,
    about = "Deadline-constrained bag-of-tasks scheduling on a hybrid cloud"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convert an SWF trace into a workload document.
    Ingest(IngestArgs),
    /// Schedule a workload document and report its metrics.
    Schedule(ScheduleArgs),
    /// Run a sweep plan over a trace and write one CSV row per run.
    Experiment(ExperimentArgs),
    /// Solve a tiny workload exactly and compare both heuristics.
    Oracle(OracleArgs),
}

/// Settings that override the config file.
#[derive(Debug, Clone, Args)]
pub struct Overrides {
    /// JSON config with fleet, catalog and run parameters.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Objective weight of local utilization.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Maximum number of VMs to rent.
    #[arg(long, value_name = "N")]
    pub vm_cap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// SWF trace file.
    pub trace: PathBuf,
    /// Deadline factor; falls back to the config's `alpha`.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub alpha: Option<u32>,
    /// Keep only the first N tasks in deadline order.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub tasks: Option<u64>,
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Workload document destination; stdout if omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    /// Workload document.
    pub workload: PathBuf,
    #[arg(long, default_value = "ha")]
    pub algorithm: Algorithm,
    /// Number of copies of the configured PM fleet.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub pm_scale: Option<u32>,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Schedule and metrics document destination; stdout if omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// Sweep plan document.
    pub plan: PathBuf,
    /// SWF trace file.
    pub trace: PathBuf,
    /// Run only this alpha instead of the plan's list.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub alpha: Option<u32>,
    /// Run only this fleet scale instead of the plan's list.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub pm_scale: Option<u32>,
    /// Run only this task count instead of the plan's list.
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u64).range(1..))]
    pub tasks: Option<u64>,
    /// Timed runs per cell, overriding the plan.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub repetitions: Option<u64>,
    #[command(flatten)]
    pub overrides: Overrides,
    /// CSV destination; stdout if omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Workload document.
    pub workload: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub pm_scale: Option<u32>,
    /// Config and objective settings; `--vm-cap` bounds the VMs the
    /// enumeration may open (default: one per task).
    #[command(flatten)]
    pub overrides: Overrides,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(args) => commands::ingest(&args),
        Command::Schedule(args) => commands::schedule(&args),
        Command::Experiment(args) => experiment::run(&args),
        Command::Oracle(args) => commands::oracle(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
