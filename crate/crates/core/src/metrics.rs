//! Feasibility, rent cost, utilization, makespan and the objective.
//!
//! Everything here is a pure function of a [`Schedule`] (and the workload it
//! claims to realize), so the same code scores heuristic output and the
//! exact solver's candidates.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Container, ContainerKind, Core, ObjectiveParams, Schedule, Task, TaskId, VmType, Workload,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("assignment references task {0} which is not in the workload")]
    DanglingAssignment(TaskId),
    #[error(
        "assignment of {task} references missing core {core_index} of container {container_id}"
    )]
    UnknownCore {
        task: TaskId,
        container_id: usize,
        core_index: usize,
    },
    #[error("container {0} is not a VM")]
    NotAVm(usize),
    #[error("container {0} is not a PM")]
    NotAPm(usize),
    #[error("epsilon {epsilon} outside (0, {bound})")]
    EpsilonOutOfRange { epsilon: f64, bound: f64 },
    #[error("VM catalog is empty")]
    EmptyCatalog,
    #[error("PM count must be at least 1")]
    NoPms,
}

/// A broken deadline or single-assignment constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DeadlineMiss {
        task: TaskId,
        finish: f64,
        deadline: f64,
    },
    Duplicate {
        task: TaskId,
        count: usize,
    },
    Unassigned {
        task: TaskId,
    },
    /// Task starts before the previous task on its core has finished.
    Overlap {
        task: TaskId,
        start: f64,
        previous_finish: f64,
    },
    /// `finish != start + requirement / capacity`.
    DurationMismatch {
        task: TaskId,
        expected: f64,
        actual: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

/// Verifies the deadline of every assignment (walking each core in start
/// order) and that every workload task is assigned exactly once.
pub fn check_deadlines(
    schedule: &Schedule,
    workload: &Workload,
) -> Result<FeasibilityReport, MetricsError> {
    let tasks: HashMap<TaskId, &Task> = workload.tasks().map(|task| (task.id(), task)).collect();
    let mut per_core: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut counts: HashMap<TaskId, usize> = HashMap::with_capacity(tasks.len());

    for (position, assignment) in schedule.assignments.iter().enumerate() {
        if !tasks.contains_key(&assignment.task) {
            return Err(MetricsError::DanglingAssignment(assignment.task));
        }
        let has_core = schedule
            .container(assignment.container_id)
            .is_some_and(|container| assignment.core_index < container.cores.len());
        if !has_core {
            return Err(MetricsError::UnknownCore {
                task: assignment.task,
                container_id: assignment.container_id,
                core_index: assignment.core_index,
            });
        }
        *counts.entry(assignment.task).or_default() += 1;
        per_core
            .entry((assignment.container_id, assignment.core_index))
            .or_default()
            .push(position);
    }

    let mut violations = Vec::new();
    for ((container_id, _), mut positions) in per_core {
        let capacity = schedule
            .container(container_id)
            .map(Container::core_capacity)
            .expect("container checked above");
        positions.sort_by(|&a, &b| {
            schedule.assignments[a]
                .start
                .total_cmp(&schedule.assignments[b].start)
                .then(a.cmp(&b))
        });
        let mut previous_finish = 0.0;
        for position in positions {
            let assignment = &schedule.assignments[position];
            let task = tasks[&assignment.task];
            if assignment.start < previous_finish {
                violations.push(Violation::Overlap {
                    task: assignment.task,
                    start: assignment.start,
                    previous_finish,
                });
            }
            let expected = assignment.start + task.work() / capacity;
            if expected != assignment.finish {
                violations.push(Violation::DurationMismatch {
                    task: assignment.task,
                    expected,
                    actual: assignment.finish,
                });
            }
            let finish = assignment.finish.max(expected);
            if finish > task.deadline {
                violations.push(Violation::DeadlineMiss {
                    task: assignment.task,
                    finish,
                    deadline: task.deadline,
                });
            }
            previous_finish = previous_finish.max(assignment.finish);
        }
    }

    for task in workload.tasks() {
        match counts.get(&task.id()).copied().unwrap_or(0) {
            0 => violations.push(Violation::Unassigned { task: task.id() }),
            1 => {}
            count => violations.push(Violation::Duplicate {
                task: task.id(),
                count,
            }),
        }
    }

    Ok(FeasibilityReport {
        feasible: violations.is_empty(),
        violations,
    })
}

/// Billed periods times price, billing the busiest core's time.
pub fn rent_cost(container: &Container) -> Result<f64, MetricsError> {
    let vm = container
        .vm_type()
        .ok_or(MetricsError::NotAVm(container.id))?;
    Ok(cost_of_cores(&container.cores, vm))
}

pub(crate) fn cost_of_cores(cores: &[Core], vm: &VmType) -> f64 {
    if cores.iter().all(|core| core.tasks.is_empty()) {
        return 0.0;
    }
    let busy = cores.iter().map(|core| core.busy_until).fold(0.0, f64::max);
    (busy / vm.billing_period).ceil() * vm.price
}

/// Total assigned work over `core count x busiest core's work`. Capacity
/// does not appear, so it cancels.
pub fn pm_utilization(container: &Container) -> Result<f64, MetricsError> {
    if container.kind() != ContainerKind::Pm {
        return Err(MetricsError::NotAPm(container.id));
    }
    Ok(utilization_of_cores(&container.cores))
}

/// Work done over the capacity-time paid for: `N_k * r_k` times the busy
/// time rounded up to whole billing periods.
pub fn vm_utilization(container: &Container) -> Result<f64, MetricsError> {
    let vm = container
        .vm_type()
        .ok_or(MetricsError::NotAVm(container.id))?;
    if !container.is_used() {
        return Ok(0.0);
    }
    let work = container
        .cores
        .iter()
        .fold(0.0, |sum, core| sum + core.work);
    let billed = (container.busy_time() / vm.billing_period).ceil() * vm.billing_period;
    Ok((work / (vm.core_count as f64 * vm.core_capacity * billed)).min(1.0))
}

/// [`pm_utilization`] for PMs, [`vm_utilization`] for VMs.
pub fn container_utilization(container: &Container) -> f64 {
    match container.kind() {
        ContainerKind::Pm => utilization_of_cores(&container.cores),
        ContainerKind::Vm => vm_utilization(container).expect("container is a VM"),
    }
}

/// The PM utilization formula applied to any container: how evenly work
/// is spread over its cores.
pub fn core_balance(container: &Container) -> f64 {
    utilization_of_cores(&container.cores)
}

pub(crate) fn utilization_of_cores(cores: &[Core]) -> f64 {
    if cores.iter().all(|core| core.tasks.is_empty()) {
        return 0.0;
    }
    let total = cores.iter().fold(0.0, |sum, core| sum + core.work);
    let busiest = cores.iter().map(|core| core.work).fold(0.0, f64::max);
    (total / (cores.len() as f64 * busiest)).min(1.0)
}

/// Unweighted mean utilization over containers that run at least one task.
pub fn overall_utilization(schedule: &Schedule) -> f64 {
    let used: Vec<f64> = schedule
        .containers
        .iter()
        .filter(|container| container.is_used())
        .map(container_utilization)
        .collect();
    if used.is_empty() {
        0.0
    } else {
        used.iter().fold(0.0, |sum, u| sum + u) / used.len() as f64
    }
}

pub fn makespan(schedule: &Schedule) -> f64 {
    schedule
        .assignments
        .iter()
        .map(|assignment| assignment.finish)
        .fold(0.0, f64::max)
}

pub fn total_rent_cost(schedule: &Schedule) -> f64 {
    schedule
        .containers
        .iter()
        .filter_map(|container| {
            container
                .vm_type()
                .map(|vm| cost_of_cores(&container.cores, vm))
        })
        .fold(0.0, |sum, cost| sum + cost)
}

/// `-epsilon * sum(PM utilization) + sum(VM rent cost)`.
pub fn objective_value(schedule: &Schedule, params: &ObjectiveParams) -> Result<f64, MetricsError> {
    check_epsilon(
        schedule.containers.iter().filter_map(Container::vm_type),
        params,
    )?;
    Ok(objective_of_containers(&schedule.containers, params))
}

pub(crate) fn check_epsilon<'a>(
    vm_types: impl IntoIterator<Item = &'a VmType>,
    params: &ObjectiveParams,
) -> Result<(), MetricsError> {
    if params.pm_count == 0 {
        return Err(MetricsError::NoPms);
    }
    let bound = vm_types
        .into_iter()
        .map(|vm| vm.price / params.pm_count as f64)
        .fold(f64::INFINITY, f64::min);
    if !(params.epsilon > 0.0 && params.epsilon < bound) {
        return Err(MetricsError::EpsilonOutOfRange {
            epsilon: params.epsilon,
            bound,
        });
    }
    Ok(())
}

/// Unchecked objective; containers are summed in slice order.
pub(crate) fn objective_of_containers(containers: &[Container], params: &ObjectiveParams) -> f64 {
    let mut utilization = 0.0;
    let mut cost = 0.0;
    for container in containers {
        match container.vm_type() {
            None => utilization += utilization_of_cores(&container.cores),
            Some(vm) => cost += cost_of_cores(&container.cores, vm),
        }
    }
    -params.epsilon * utilization + cost
}

/// Half of the largest admissible epsilon.
pub fn default_epsilon(catalog: &[VmType], pm_count: usize) -> Result<f64, MetricsError> {
    if pm_count == 0 {
        return Err(MetricsError::NoPms);
    }
    let min_price = catalog
        .iter()
        .map(|vm| vm.price)
        .reduce(f64::min)
        .ok_or(MetricsError::EmptyCatalog)?;
    Ok(0.5 * min_price / pm_count as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContainerValue {
    pub container_id: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
    /// Per VM container.
    pub rent_costs: Vec<ContainerValue>,
    pub total_rent_cost: f64,
    /// Per PM container, including unused ones.
    pub pm_utilizations: Vec<ContainerValue>,
    /// Per VM container, against billed capacity-time.
    pub vm_utilizations: Vec<ContainerValue>,
    /// Per VM container, the PM formula (spread of work over cores).
    pub vm_core_balance: Vec<ContainerValue>,
    pub overall_utilization: f64,
    pub makespan: f64,
    pub objective: f64,
    pub rented_vms: usize,
}

pub fn evaluate(
    schedule: &Schedule,
    workload: &Workload,
    params: &ObjectiveParams,
) -> Result<MetricsReport, MetricsError> {
    let feasibility = check_deadlines(schedule, workload)?;
    let objective = objective_value(schedule, params)?;
    let mut rent_costs = Vec::new();
    let mut pm_utilizations = Vec::new();
    let mut vm_utilizations = Vec::new();
    let mut vm_core_balance = Vec::new();
    for container in &schedule.containers {
        let utilization = ContainerValue {
            container_id: container.id,
            value: container_utilization(container),
        };
        match container.vm_type() {
            None => pm_utilizations.push(utilization),
            Some(vm) => {
                rent_costs.push(ContainerValue {
                    container_id: container.id,
                    value: cost_of_cores(&container.cores, vm),
                });
                vm_utilizations.push(utilization);
                vm_core_balance.push(ContainerValue {
                    container_id: container.id,
                    value: core_balance(container),
                });
            }
        }
    }
    Ok(MetricsReport {
        feasible: feasibility.feasible,
        violations: feasibility.violations,
        total_rent_cost: rent_costs.iter().fold(0.0, |sum, c| sum + c.value),
        rent_costs,
        pm_utilizations,
        vm_utilizations,
        vm_core_balance,
        overall_utilization: overall_utilization(schedule),
        makespan: makespan(schedule),
        objective,
        rented_vms: schedule.rented_vm_count,
    })
}
