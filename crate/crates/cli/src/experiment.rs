//! Sweeps over algorithm, alpha, fleet scale and task count.
//!
//! Cells run one after another so that wall times are not skewed by
//! sibling runs. A failing cell becomes a row with empty metric columns and
//! the sweep carries on.

use std::time::Instant;

use hybrid_sched::trace::{parse_swf_str, RawTraceJob};
use hybrid_sched::{
    evaluate, to_workload, truncate_tasks, Algorithm, HybridConfig, MetricsReport, Workload,
};
use serde::{Deserialize, Serialize};

use crate::commands::{load_config, read_json, read_text, verify, write_output};
use crate::error::CliError;
use crate::ExperimentArgs;

fn default_repetitions() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub algorithms: Vec<Algorithm>,
    pub alphas: Vec<u32>,
    pub pm_scales: Vec<u32>,
    /// Full trace when absent.
    #[serde(default)]
    pub task_counts: Option<Vec<usize>>,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |reason: &str| Err(CliError::Validation(format!("invalid plan: {reason}")));
        if self.algorithms.is_empty() {
            return fail("algorithms is empty");
        }
        if self.alphas.is_empty() || self.alphas.contains(&0) {
            return fail("alphas must be a non-empty list of positive integers");
        }
        if self.pm_scales.is_empty() || self.pm_scales.contains(&0) {
            return fail("pm_scales must be a non-empty list of positive integers");
        }
        if let Some(counts) = &self.task_counts {
            if counts.is_empty() || counts.contains(&0) {
                return fail("task_counts must be a non-empty list of positive integers");
            }
        }
        if self.repetitions == 0 {
            return fail("repetitions must be at least 1");
        }
        Ok(())
    }
}

/// One CSV row; metric columns stay empty when the run failed.
#[derive(Debug, Serialize)]
struct Row {
    algorithm: &'static str,
    alpha: u32,
    pm_scale: u32,
    tasks: usize,
    total_rent_cost: Option<f64>,
    makespan: Option<f64>,
    overall_utilization: Option<f64>,
    rented_vms: Option<usize>,
    objective: Option<f64>,
    wall_time_ms: Option<f64>,
}

struct Cell {
    algorithm: Algorithm,
    alpha: u32,
    pm_scale: u32,
    tasks: Option<usize>,
}

pub fn run(args: &ExperimentArgs) -> Result<(), CliError> {
    let mut plan: ExperimentPlan = read_json(&args.plan)?;
    if let Some(alpha) = args.alpha {
        plan.alphas = vec![alpha];
    }
    if let Some(scale) = args.pm_scale {
        plan.pm_scales = vec![scale];
    }
    if let Some(tasks) = args.tasks {
        plan.task_counts = Some(vec![tasks as usize]);
    }
    if let Some(repetitions) = args.repetitions {
        plan.repetitions = repetitions as usize;
    }
    plan.validate()?;
    let config = load_config(&args.overrides, None)?;
    let trace = parse_swf_str(&read_text(&args.trace)?)?;

    let counts: Vec<Option<usize>> = match &plan.task_counts {
        Some(counts) => counts.iter().copied().map(Some).collect(),
        None => vec![None],
    };
    let mut rows = Vec::new();
    let mut first_failure: Option<CliError> = None;
    for &algorithm in &plan.algorithms {
        for &alpha in &plan.alphas {
            for &pm_scale in &plan.pm_scales {
                for &tasks in &counts {
                    let cell = Cell {
                        algorithm,
                        alpha,
                        pm_scale,
                        tasks,
                    };
                    let (row, failure) = run_cell(&cell, &trace.jobs, &config, plan.repetitions);
                    if let Some(err) = failure {
                        eprintln!(
                            "{} alpha={alpha} pm_scale={pm_scale} tasks={}: {err}",
                            algorithm.name(),
                            row.tasks
                        );
                        first_failure.get_or_insert(err);
                    }
                    rows.push(row);
                }
            }
        }
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        writer.serialize(row).expect("rows serialize");
    }
    let bytes = writer.into_inner().expect("in-memory writer");
    write_output(args.out.as_deref(), &bytes)?;
    eprintln!("{} run(s) written", rows.len());
    match first_failure {
        Some(err) => Err(err),
        None => Ok(()),
    }
}

fn run_cell(
    cell: &Cell,
    jobs: &[RawTraceJob],
    config: &HybridConfig,
    repetitions: usize,
) -> (Row, Option<CliError>) {
    let mut row = Row {
        algorithm: cell.algorithm.name(),
        alpha: cell.alpha,
        pm_scale: cell.pm_scale,
        tasks: cell.tasks.unwrap_or(0),
        total_rent_cost: None,
        makespan: None,
        overall_utilization: None,
        rented_vms: None,
        objective: None,
        wall_time_ms: None,
    };
    let workload = match cell_workload(cell, jobs, config) {
        Ok(workload) => workload,
        Err(err) => return (row, Some(err)),
    };
    row.tasks = workload.total_tasks();
    match measure(cell, &workload, config, repetitions) {
        Ok((metrics, wall_time_ms)) => {
            row.total_rent_cost = Some(metrics.total_rent_cost);
            row.makespan = Some(metrics.makespan);
            row.overall_utilization = Some(metrics.overall_utilization);
            row.rented_vms = Some(metrics.rented_vms);
            row.objective = Some(metrics.objective);
            row.wall_time_ms = Some(wall_time_ms);
            (row, None)
        }
        Err(err) => (row, Some(err)),
    }
}

fn cell_workload(
    cell: &Cell,
    jobs: &[RawTraceJob],
    config: &HybridConfig,
) -> Result<Workload, CliError> {
    let workload = to_workload(jobs, cell.alpha, config.task_mapping)?;
    Ok(match cell.tasks {
        Some(tasks) => truncate_tasks(&workload, tasks)?,
        None => workload,
    })
}

/// Metrics of the schedule and the median scheduler wall time in ms.
fn measure(
    cell: &Cell,
    workload: &Workload,
    config: &HybridConfig,
    repetitions: usize,
) -> Result<(MetricsReport, f64), CliError> {
    let mut scaled = config.clone();
    scaled.scale_factor = cell.pm_scale;
    let pms = scaled.scaled_pms();
    let params = config.objective_params(pms.len())?;
    let mut times = Vec::with_capacity(repetitions);
    let mut schedule = None;
    for _ in 0..repetitions {
        let start = Instant::now();
        let result = cell
            .algorithm
            .run(workload, &pms, &config.catalog, config.vm_cap)?;
        times.push(start.elapsed().as_secs_f64() * 1e3);
        schedule = Some(result);
    }
    let schedule = schedule.expect("at least one repetition");
    verify(&schedule, workload)?;
    Ok((evaluate(&schedule, workload, &params)?, median(&mut times)))
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}
