//! Exhaustive optimum for tiny instances.
//!
//! Every map from tasks to cores is enumerated depth-first. Tasks are taken
//! in workload order, so appending to a core keeps each core's sequence in
//! ascending-deadline order and the deadline test is a running sum. Two
//! symmetries are folded away: empty cores within one container are
//! interchangeable, and VM instances are opened in first-use order so
//! permutations of identical instances are visited once. A partial
//! assignment that misses a deadline, or whose rent cost so far cannot beat
//! the incumbent, is cut.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{check_epsilon, cost_of_cores, objective_of_containers, MetricsError};
use crate::model::{
    validate_catalog, validate_fleet, Assignment, Container, ModelError, ObjectiveParams, PmSpec,
    Schedule, Task, VmType, Workload,
};
use crate::provision::fits_alone;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExactError {
    #[error("instance too large for enumeration: {0}")]
    InstanceTooLarge(String),
    #[error("no assignment meets every deadline ({explored} candidates explored)")]
    Infeasible { explored: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactLimits {
    pub max_tasks: usize,
    /// Total cores over all PMs.
    pub max_pm_cores: usize,
}

impl Default for ExactLimits {
    fn default() -> Self {
        Self {
            max_tasks: 8,
            max_pm_cores: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub schedule: Schedule,
    pub objective: f64,
    /// Complete assignments evaluated.
    pub explored: u64,
}

pub fn solve_exact(
    workload: &Workload,
    pms: &[PmSpec],
    catalog: &[VmType],
    max_vms: usize,
    params: &ObjectiveParams,
) -> Result<ExactSolution, ExactError> {
    solve_exact_with_limits(
        workload,
        pms,
        catalog,
        max_vms,
        params,
        &ExactLimits::default(),
    )
}

pub fn solve_exact_with_limits(
    workload: &Workload,
    pms: &[PmSpec],
    catalog: &[VmType],
    max_vms: usize,
    params: &ObjectiveParams,
    limits: &ExactLimits,
) -> Result<ExactSolution, ExactError> {
    validate_fleet(pms)?;
    validate_catalog(catalog)?;
    check_epsilon(catalog, params)?;
    if workload.total_tasks() > limits.max_tasks {
        return Err(ExactError::InstanceTooLarge(format!(
            "{} tasks exceed the bound of {}",
            workload.total_tasks(),
            limits.max_tasks
        )));
    }
    let pm_cores: usize = pms.iter().map(|pm| pm.core_count).sum();
    if pm_cores > limits.max_pm_cores {
        return Err(ExactError::InstanceTooLarge(format!(
            "{pm_cores} PM cores exceed the bound of {}",
            limits.max_pm_cores
        )));
    }

    let tasks: Vec<Task> = workload.tasks().cloned().collect();
    let mut search = Search {
        max_vms: max_vms.min(tasks.len()),
        tasks,
        catalog,
        params: *params,
        containers: pms.iter().cloned().map(Container::pm).collect(),
        pm_count: pms.len(),
        per_type: vec![0; catalog.len()],
        assignments: Vec::new(),
        best: None,
        explored: 0,
    };
    search.descend(0);

    let explored = search.explored;
    match search.best {
        Some(best) => Ok(ExactSolution {
            schedule: Schedule::new(best.assignments, best.containers),
            objective: best.objective,
            explored,
        }),
        None => Err(ExactError::Infeasible { explored }),
    }
}

struct Incumbent {
    objective: f64,
    containers: Vec<Container>,
    assignments: Vec<Assignment>,
}

struct Search<'a> {
    tasks: Vec<Task>,
    catalog: &'a [VmType],
    max_vms: usize,
    params: ObjectiveParams,
    /// PMs in id order, then VMs in opening order.
    containers: Vec<Container>,
    pm_count: usize,
    per_type: Vec<usize>,
    assignments: Vec<Assignment>,
    best: Option<Incumbent>,
    explored: u64,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize) {
        if depth == self.tasks.len() {
            self.explored += 1;
            let objective = objective_of_containers(&self.containers, &self.params);
            if self
                .best
                .as_ref()
                .is_none_or(|best| objective < best.objective)
            {
                self.best = Some(Incumbent {
                    objective,
                    containers: self.containers.clone(),
                    assignments: self.assignments.clone(),
                });
            }
            return;
        }
        if let Some(best) = &self.best {
            if self.lower_bound() >= best.objective {
                return;
            }
        }

        let task = self.tasks[depth].clone();
        for position in 0..self.containers.len() {
            let mut tried_empty = false;
            for core in 0..self.containers[position].cores.len() {
                if self.containers[position].cores[core].tasks.is_empty() {
                    if tried_empty {
                        continue;
                    }
                    tried_empty = true;
                }
                if self.containers[position].finish_if_appended(core, &task) <= task.deadline {
                    self.place_and_descend(position, core, &task, depth);
                }
            }
        }

        if self.containers.len() - self.pm_count < self.max_vms {
            for type_position in 0..self.catalog.len() {
                let vm = &self.catalog[type_position];
                if !fits_alone(&task, vm.core_capacity) {
                    continue;
                }
                let id = self.containers.len() + 1;
                let ordinal = self.per_type[type_position];
                self.per_type[type_position] += 1;
                self.containers.push(Container::vm(id, vm.clone(), ordinal));
                let position = self.containers.len() - 1;
                self.place_and_descend(position, 0, &task, depth);
                self.containers.pop();
                self.per_type[type_position] -= 1;
            }
        }
    }

    fn place_and_descend(&mut self, position: usize, core: usize, task: &Task, depth: usize) {
        let saved = {
            let state = &self.containers[position].cores[core];
            (state.busy_until, state.work)
        };
        let assignment = self.containers[position].append(core, task);
        self.assignments.push(assignment);
        self.descend(depth + 1);
        self.assignments.pop();
        let state = &mut self.containers[position].cores[core];
        state.tasks.pop();
        state.busy_until = saved.0;
        state.work = saved.1;
    }

    /// No extension can score below this: rent cost only grows and every
    /// PM utilization is at most 1.
    fn lower_bound(&self) -> f64 {
        let cost: f64 = self.containers[self.pm_count..]
            .iter()
            .map(|container| cost_of_cores(&container.cores, container.vm_type().unwrap()))
            .fold(0.0, |sum, cost| sum + cost);
        -self.params.epsilon * self.pm_count as f64 + cost
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{check_deadlines, objective_value};
    use crate::model::{build_workload, ContainerKind, Job, TaskId};

    fn c3_large() -> VmType {
        VmType::new("c3.large", 2, 2.7, 0.105)
    }

    #[test]
    fn two_task_scenario() {
        let workload = build_workload(vec![Job::new(1, 2.0, &[4.0, 2.0])]).unwrap();
        let params = ObjectiveParams::new(0.01, 1);
        let solution = solve_exact(
            &workload,
            &[PmSpec::new(1, 1, 2.0)],
            &[c3_large()],
            2,
            &params,
        )
        .unwrap();
        assert!((solution.objective - 0.095).abs() < 1e-15);
        let pm = solution.schedule.container(1).unwrap();
        assert_eq!(pm.cores[0].tasks, vec![TaskId::new(1, 0)]);
        assert_eq!(solution.schedule.rented_vm_count, 1);
        assert!(
            check_deadlines(&solution.schedule, &workload)
                .unwrap()
                .feasible
        );
        assert_eq!(
            objective_value(&solution.schedule, &params),
            Ok(solution.objective)
        );
    }

    #[test]
    fn single_local_task() {
        let workload = build_workload(vec![Job::new(1, 10.0, &[2.0])]).unwrap();
        let params = ObjectiveParams::new(0.01, 1);
        let solution = solve_exact(
            &workload,
            &[PmSpec::new(1, 1, 2.0)],
            &[c3_large()],
            1,
            &params,
        )
        .unwrap();
        assert_eq!(solution.objective, -0.01);
        assert!(solution
            .schedule
            .containers
            .iter()
            .all(|c| c.kind() == ContainerKind::Pm));
    }

    #[test]
    fn infeasible_and_too_large() {
        let params = ObjectiveParams::new(0.01, 1);
        let hopeless = build_workload(vec![Job::new(1, 0.1, &[2.0])]).unwrap();
        let err = solve_exact(
            &hopeless,
            &[PmSpec::new(1, 1, 2.0)],
            &[c3_large()],
            1,
            &params,
        );
        assert!(matches!(err, Err(ExactError::Infeasible { .. })));

        let big = build_workload(vec![Job::new(1, 10.0, &[1.0; 9])]).unwrap();
        let err = solve_exact(&big, &[PmSpec::new(1, 1, 2.0)], &[c3_large()], 1, &params);
        assert!(matches!(err, Err(ExactError::InstanceTooLarge(_))));

        let bad = ObjectiveParams::new(0.2, 1);
        let err = solve_exact(&hopeless, &[PmSpec::new(1, 1, 2.0)], &[c3_large()], 1, &bad);
        assert!(matches!(
            err,
            Err(ExactError::Metrics(MetricsError::EpsilonOutOfRange { .. }))
        ));
    }

    #[test]
    fn prefers_better_balanced_pm() {
        // Spreading over both cores gives u = 1 instead of 0.5.
        let workload = build_workload(vec![Job::new(1, 10.0, &[2.0, 2.0])]).unwrap();
        let params = ObjectiveParams::new(0.01, 1);
        let solution = solve_exact(
            &workload,
            &[PmSpec::new(1, 2, 2.0)],
            &[c3_large()],
            2,
            &params,
        )
        .unwrap();
        assert_eq!(solution.objective, -0.01);
        let pm = solution.schedule.container(1).unwrap();
        assert!(pm.cores.iter().all(|core| core.tasks.len() == 1));
    }
}
