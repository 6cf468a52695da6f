use std::fs;
use std::io::{self, Write};
use std::path::Path;

use hybrid_sched::trace::parse_swf_str;
use hybrid_sched::{
    check_deadlines, evaluate, objective_value, solve_exact, to_workload, truncate_tasks,
    Algorithm, HybridConfig, MetricsReport, Schedule, Workload,
};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::CliError;
use crate::{IngestArgs, OracleArgs, Overrides, ScheduleArgs};

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|err| CliError::io(path, err))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|err| CliError::Validation(format!("{}: {err}", path.display())))
}

/// Writes to `path`, or to stdout when there is none.
pub fn write_output(path: Option<&Path>, contents: &[u8]) -> Result<(), CliError> {
    match path {
        Some(path) => fs::write(path, contents).map_err(|err| CliError::io(path, err)),
        None => io::stdout()
            .write_all(contents)
            .map_err(|err| CliError::io(Path::new("<stdout>"), err)),
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, document: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_vec_pretty(document).expect("documents serialize");
    text.push(b'\n');
    write_output(path, &text)
}

pub fn load_config(overrides: &Overrides, pm_scale: Option<u32>) -> Result<HybridConfig, CliError> {
    let mut config = match &overrides.config {
        Some(path) => HybridConfig::from_json(&read_text(path)?)?,
        None => HybridConfig::default(),
    };
    if let Some(scale) = pm_scale {
        config.scale_factor = scale;
    }
    if overrides.vm_cap.is_some() {
        config.vm_cap = overrides.vm_cap;
    }
    if overrides.epsilon.is_some() {
        config.epsilon = overrides.epsilon;
    }
    hybrid_sched::model::validate_catalog(&config.catalog)?;
    Ok(config)
}

/// Refuses to emit a schedule that breaks a deadline or loses a task.
pub fn verify(schedule: &Schedule, workload: &Workload) -> Result<(), CliError> {
    let report = check_deadlines(schedule, workload)?;
    if report.feasible {
        Ok(())
    } else {
        Err(CliError::Internal(format!(
            "schedule failed verification with {} violation(s), first: {:?}",
            report.violations.len(),
            report.violations[0]
        )))
    }
}

pub fn ingest(args: &IngestArgs) -> Result<(), CliError> {
    let config = load_config(
        &Overrides {
            config: args.config.clone(),
            epsilon: None,
            vm_cap: None,
        },
        None,
    )?;
    let alpha = args
        .alpha
        .or(config.alpha)
        .ok_or_else(|| CliError::Validation("an alpha is required (--alpha or config)".into()))?;
    let trace = parse_swf_str(&read_text(&args.trace)?)?;
    let mut workload = to_workload(&trace.jobs, alpha, config.task_mapping)?;
    if let Some(tasks) = args.tasks {
        workload = truncate_tasks(&workload, tasks as usize)?;
    }
    write_json(args.out.as_deref(), &workload)?;
    eprintln!(
        "{}: retained {} job(s), dropped {}, {} task(s) written",
        args.trace.display(),
        trace.jobs.len(),
        trace.dropped,
        workload.total_tasks()
    );
    Ok(())
}

#[derive(Serialize)]
struct ScheduleDocument<'a> {
    algorithm: Algorithm,
    schedule: &'a Schedule,
    metrics: &'a MetricsReport,
}

pub fn schedule(args: &ScheduleArgs) -> Result<(), CliError> {
    let workload: Workload = read_json(&args.workload)?;
    let config = load_config(&args.overrides, args.pm_scale)?;
    let pms = config.scaled_pms();
    let params = config.objective_params(pms.len())?;
    let schedule = args
        .algorithm
        .run(&workload, &pms, &config.catalog, config.vm_cap)?;
    verify(&schedule, &workload)?;
    let metrics = evaluate(&schedule, &workload, &params)?;
    write_json(
        args.out.as_deref(),
        &ScheduleDocument {
            algorithm: args.algorithm,
            schedule: &schedule,
            metrics: &metrics,
        },
    )?;
    eprintln!(
        "{}: rent cost {}, makespan {}, utilization {:.4}, {} VM(s) rented, objective {}",
        args.algorithm.name(),
        metrics.total_rent_cost,
        metrics.makespan,
        metrics.overall_utilization,
        metrics.rented_vms,
        metrics.objective
    );
    Ok(())
}

#[derive(Serialize)]
struct HeuristicOutcome {
    algorithm: Algorithm,
    objective: Option<f64>,
    /// Objective minus the optimum.
    gap: Option<f64>,
    error: Option<String>,
}

#[derive(Serialize)]
struct OracleDocument {
    objective: f64,
    explored: u64,
    schedule: Schedule,
    heuristics: Vec<HeuristicOutcome>,
}

pub fn oracle(args: &OracleArgs) -> Result<(), CliError> {
    let workload: Workload = read_json(&args.workload)?;
    let config = load_config(&args.overrides, args.pm_scale)?;
    let pms = config.scaled_pms();
    let params = config.objective_params(pms.len())?;
    let max_vms = config.vm_cap.unwrap_or(workload.total_tasks());
    let solution = solve_exact(&workload, &pms, &config.catalog, max_vms, &params)?;
    verify(&solution.schedule, &workload)?;

    let heuristics = [Algorithm::Ha, Algorithm::Ffd]
        .into_iter()
        .map(|algorithm| {
            let result = algorithm
                .run(&workload, &pms, &config.catalog, Some(max_vms))
                .map_err(CliError::from)
                .and_then(|schedule| {
                    verify(&schedule, &workload)?;
                    Ok(objective_value(&schedule, &params)?)
                });
            match result {
                Ok(objective) => HeuristicOutcome {
                    algorithm,
                    objective: Some(objective),
                    gap: Some(objective - solution.objective),
                    error: None,
                },
                Err(err) => HeuristicOutcome {
                    algorithm,
                    objective: None,
                    gap: None,
                    error: Some(err.to_string()),
                },
            }
        })
        .collect::<Vec<_>>();

    eprintln!(
        "optimum {} after {} complete assignment(s)",
        solution.objective, solution.explored
    );
    for outcome in &heuristics {
        match (outcome.objective, outcome.gap) {
            (Some(objective), Some(gap)) => {
                eprintln!(
                    "{}: objective {objective}, gap {gap}",
                    outcome.algorithm.name()
                )
            }
            _ => eprintln!(
                "{}: {}",
                outcome.algorithm.name(),
                outcome.error.as_deref().unwrap_or_default()
            ),
        }
    }
    write_json(
        args.out.as_deref(),
        &OracleDocument {
            objective: solution.objective,
            explored: solution.explored,
            schedule: solution.schedule,
            heuristics,
        },
    )
}
