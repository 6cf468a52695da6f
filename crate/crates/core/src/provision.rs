//! PM and VM selection rules shared by both heuristics.

use thiserror::Error;

use crate::metrics::MetricsError;
use crate::model::{ModelError, PmSpec, Task, TaskId, VmType};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("no PM or VM type is available")]
    NoResources,
    #[error("{} task(s) cannot meet their deadline on any core: {}", .tasks.len(), format_ids(.tasks))]
    UnschedulableTask { tasks: Vec<TaskId> },
    #[error("VM cap of {cap} reached with {remaining} task(s) unassigned")]
    VmCapExceeded { cap: usize, remaining: usize },
    #[error("no PM is available")]
    NoPmAvailable,
    #[error("no VM type can run every remaining task within its deadline")]
    NoFeasibleVmType,
}

fn format_ids(ids: &[TaskId]) -> String {
    const SHOWN: usize = 10;
    let mut text: Vec<String> = ids.iter().take(SHOWN).map(ToString::to_string).collect();
    if ids.len() > SHOWN {
        text.push(format!("... {} more", ids.len() - SHOWN));
    }
    text.join(", ")
}

/// The PM with the largest `core_count * core_capacity`; lowest id on ties.
pub fn select_pm(available: &[PmSpec]) -> Result<&PmSpec, ScheduleError> {
    available
        .iter()
        .reduce(|best, pm| {
            let (a, b) = (pm.total_capacity(), best.total_capacity());
            if a > b || (a == b && pm.id < best.id) {
                pm
            } else {
                best
            }
        })
        .ok_or(ScheduleError::NoPmAvailable)
}

/// `true` if a fresh core of `capacity` finishes `task` by its deadline.
pub fn fits_alone(task: &Task, capacity: f64) -> bool {
    task.work() / capacity <= task.deadline
}

/// Among types on which every task fits alone, the best cost-performance
/// ratio wins, then the lower price, then the lower `type_id`.
pub fn select_vm_type<'a>(
    unassigned: &[Task],
    catalog: &'a [VmType],
) -> Result<&'a VmType, ScheduleError> {
    catalog
        .iter()
        .filter(|vm| {
            unassigned
                .iter()
                .all(|task| fits_alone(task, vm.core_capacity))
        })
        .reduce(|best, vm| if vm_preferred(vm, best) { vm } else { best })
        .ok_or(ScheduleError::NoFeasibleVmType)
}

fn vm_preferred(candidate: &VmType, incumbent: &VmType) -> bool {
    let (a, b) = (candidate.cost_performance(), incumbent.cost_performance());
    if a != b {
        return a > b;
    }
    if candidate.price != incumbent.price {
        return candidate.price < incumbent.price;
    }
    candidate.type_id < incumbent.type_id
}

/// Tasks that no fresh core of any PM or VM type could finish in time.
pub(crate) fn screen_unschedulable(
    tasks: &[Task],
    pms: &[PmSpec],
    catalog: &[VmType],
) -> Vec<TaskId> {
    let best_pm = pms.iter().map(|pm| pm.core_capacity).reduce(f64::max);
    let best_vm = catalog.iter().map(|vm| vm.core_capacity).reduce(f64::max);
    tasks
        .iter()
        .filter(|task| {
            let fits = |capacity: Option<f64>| capacity.is_some_and(|c| fits_alone(task, c));
            !fits(best_pm) && !fits(best_vm)
        })
        .map(Task::id)
        .collect()
}

/// Tasks that fail the fit-alone check on every catalog type.
pub(crate) fn vm_misfits(tasks: &[Task], catalog: &[VmType]) -> Vec<TaskId> {
    let best_vm = catalog.iter().map(|vm| vm.core_capacity).reduce(f64::max);
    tasks
        .iter()
        .filter(|task| !best_vm.is_some_and(|c| fits_alone(task, c)))
        .map(Task::id)
        .collect()
}

/// Next VM container id and per-type instance ordinals.
#[derive(Debug)]
pub(crate) struct VmRoster {
    next_id: usize,
    per_type: Vec<usize>,
    rented: usize,
    cap: Option<usize>,
}

impl VmRoster {
    pub(crate) fn new(pm_count: usize, catalog_len: usize, cap: Option<usize>) -> Self {
        Self {
            next_id: pm_count + 1,
            per_type: vec![0; catalog_len],
            rented: 0,
            cap,
        }
    }

    /// Returns `(container_id, instance_ordinal)` for a new instance.
    pub(crate) fn rent(
        &mut self,
        type_position: usize,
        remaining: usize,
    ) -> Result<(usize, usize), ScheduleError> {
        if let Some(cap) = self.cap {
            if self.rented >= cap {
                return Err(ScheduleError::VmCapExceeded { cap, remaining });
            }
        }
        let id = self.next_id;
        let ordinal = self.per_type[type_position];
        self.next_id += 1;
        self.per_type[type_position] += 1;
        self.rented += 1;
        Ok((id, ordinal))
    }

    pub(crate) fn check_cap(&self, remaining: usize) -> Result<(), ScheduleError> {
        match self.cap {
            Some(cap) if self.rented >= cap => Err(ScheduleError::VmCapExceeded { cap, remaining }),
            _ => Ok(()),
        }
    }
}

pub(crate) fn validate_inputs(pms: &[PmSpec], catalog: &[VmType]) -> Result<(), ScheduleError> {
    crate::model::validate_fleet(pms)?;
    crate::model::validate_catalog(catalog)?;
    if pms.is_empty() && catalog.is_empty() {
        return Err(ScheduleError::NoResources);
    }
    Ok(())
}

pub(crate) fn position_of(catalog: &[VmType], vm: &VmType) -> usize {
    catalog
        .iter()
        .position(|candidate| candidate.type_id == vm.type_id)
        .expect("selected type comes from the catalog")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Job;

    #[test]
    fn pm_by_total_capacity() {
        let pms = [PmSpec::new(1, 4, 2.0), PmSpec::new(2, 2, 3.0)];
        assert_eq!(select_pm(&pms).unwrap().id, 1);
        let tie = [PmSpec::new(2, 1, 4.0), PmSpec::new(1, 2, 2.0)];
        assert_eq!(select_pm(&tie).unwrap().id, 1);
        assert_eq!(select_pm(&pms[1..]).unwrap().id, 2);
        assert_eq!(select_pm(&[]), Err(ScheduleError::NoPmAvailable));
    }

    #[test]
    fn vm_by_ratio() {
        let x = VmType::new("X", 2, 2.7, 0.105);
        let y = VmType::new("Y", 1, 3.0, 0.07);
        assert!(x.cost_performance() > y.cost_performance());
        let tasks = Job::new(1, 100.0, &[1.0]).tasks;
        let catalog = [y.clone(), x.clone()];
        assert_eq!(select_vm_type(&tasks, &catalog).unwrap().type_id, "X");
    }

    #[test]
    fn vm_fit_filter_dominates_ratio() {
        let x = VmType::new("X", 2, 2.7, 0.105);
        let y = VmType::new("Y", 1, 3.5, 0.07);
        let tasks = Job::new(1, 3.0, &[10.0]).tasks;
        let catalog = [x, y];
        assert_eq!(select_vm_type(&tasks, &catalog).unwrap().type_id, "Y");
        let hopeless = Job::new(1, 1.0, &[10.0]).tasks;
        assert_eq!(
            select_vm_type(&hopeless, &catalog),
            Err(ScheduleError::NoFeasibleVmType)
        );
    }

    #[test]
    fn vm_ratio_tie_prefers_cheaper() {
        let cheap = VmType::new("cheap", 1, 2.0, 0.10);
        let dear = VmType::new("dear", 2, 2.0, 0.20);
        assert_eq!(cheap.cost_performance(), dear.cost_performance());
        let tasks = Job::new(1, 10.0, &[1.0]).tasks;
        let catalog = [dear, cheap];
        assert_eq!(select_vm_type(&tasks, &catalog).unwrap().type_id, "cheap");
    }

    #[test]
    fn cap_enforced() {
        let mut roster = VmRoster::new(3, 1, Some(1));
        assert_eq!(roster.rent(0, 5), Ok((4, 0)));
        assert_eq!(
            roster.rent(0, 2),
            Err(ScheduleError::VmCapExceeded {
                cap: 1,
                remaining: 2
            })
        );
    }
}
