//! Minimum-slack greedy heuristic.
//!
//! Cores enter a pool one container at a time: the largest remaining PM
//! first, then rented VMs once the local fleet is exhausted. While the pool
//! is non-empty the (task, core) pair that finishes closest to its deadline
//! is placed. When no pooled core can take any remaining task the whole pool
//! is retired for good and the next container is opened.

use crate::model::{Assignment, Container, PmSpec, Schedule, Task, VmType, Workload};
use crate::provision::{
    position_of, screen_unschedulable, select_pm, select_vm_type, validate_inputs, vm_misfits,
    ScheduleError, VmRoster,
};

/// A pooled core as seen by [`select_assignment`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoreSlot {
    pub container_id: usize,
    pub core_index: usize,
    pub capacity: f64,
    pub busy_until: f64,
}

/// Chosen pair: positions into the task list and the pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Selection {
    pub task: usize,
    pub slot: usize,
    pub finish: f64,
}

/// Picks the deadline-feasible pair with minimal slack, preferring larger
/// requirements, then lower task ids, then lower `(container, core)`.
pub fn select_assignment(unassigned: &[Task], pool: &[CoreSlot]) -> Option<Selection> {
    let mut best: Option<(Selection, f64)> = None;
    for (task_pos, task) in unassigned.iter().enumerate() {
        for (slot_pos, slot) in pool.iter().enumerate() {
            let finish = slot.busy_until + task.work() / slot.capacity;
            if finish > task.deadline {
                continue;
            }
            let slack = task.deadline - finish;
            let better = match &best {
                None => true,
                Some((incumbent, incumbent_slack)) => {
                    if slack != *incumbent_slack {
                        slack < *incumbent_slack
                    } else {
                        let other = &unassigned[incumbent.task];
                        if task.work() != other.work() {
                            task.work() > other.work()
                        } else if task.id() != other.id() {
                            task.id() < other.id()
                        } else {
                            let current = &pool[incumbent.slot];
                            (slot.container_id, slot.core_index)
                                < (current.container_id, current.core_index)
                        }
                    }
                }
            };
            if better {
                best = Some((
                    Selection {
                        task: task_pos,
                        slot: slot_pos,
                        finish,
                    },
                    slack,
                ));
            }
        }
    }
    best.map(|(selection, _)| selection)
}

/// What the heuristic did, in order.
#[derive(Debug, Clone, PartialEq)]
pub enum HaEvent {
    OpenPm {
        container_id: usize,
    },
    RentVm {
        container_id: usize,
        type_id: String,
    },
    Assign(Assignment),
    /// The listed containers' cores left the pool permanently.
    Retire {
        container_ids: Vec<usize>,
    },
}

pub fn schedule_ha(
    workload: &Workload,
    pms: &[PmSpec],
    catalog: &[VmType],
    vm_cap: Option<usize>,
) -> Result<Schedule, ScheduleError> {
    run(workload, pms, catalog, vm_cap, None)
}

/// [`schedule_ha`] that also records every pool event.
pub fn schedule_ha_with_events(
    workload: &Workload,
    pms: &[PmSpec],
    catalog: &[VmType],
    vm_cap: Option<usize>,
) -> Result<(Schedule, Vec<HaEvent>), ScheduleError> {
    let mut events = Vec::new();
    let schedule = run(workload, pms, catalog, vm_cap, Some(&mut events))?;
    Ok((schedule, events))
}

fn run(
    workload: &Workload,
    pms: &[PmSpec],
    catalog: &[VmType],
    vm_cap: Option<usize>,
    mut events: Option<&mut Vec<HaEvent>>,
) -> Result<Schedule, ScheduleError> {
    validate_inputs(pms, catalog)?;
    let mut unassigned: Vec<Task> = workload.tasks().cloned().collect();
    let offenders = screen_unschedulable(&unassigned, pms, catalog);
    if !offenders.is_empty() {
        return Err(ScheduleError::UnschedulableTask { tasks: offenders });
    }

    let mut available: Vec<PmSpec> = pms.to_vec();
    let mut roster = VmRoster::new(pms.len(), catalog.len(), vm_cap);
    let mut containers: Vec<Container> = Vec::new();
    let mut pool: Vec<CoreSlot> = Vec::new();
    // Position in `containers` of each pooled slot.
    let mut pool_owner: Vec<usize> = Vec::new();
    let mut assignments = Vec::with_capacity(unassigned.len());
    let mut record = |event: HaEvent| {
        if let Some(log) = events.as_deref_mut() {
            log.push(event);
        }
    };

    while !unassigned.is_empty() {
        if pool.is_empty() {
            let container = if !available.is_empty() {
                let chosen = select_pm(&available)?.id;
                let position = available.iter().position(|pm| pm.id == chosen).unwrap();
                let pm = available.remove(position);
                record(HaEvent::OpenPm {
                    container_id: pm.id,
                });
                Container::pm(pm)
            } else {
                roster.check_cap(unassigned.len())?;
                let vm = select_vm_type(&unassigned, catalog).map_err(|err| match err {
                    ScheduleError::NoFeasibleVmType => ScheduleError::UnschedulableTask {
                        tasks: vm_misfits(&unassigned, catalog),
                    },
                    other => other,
                })?;
                let (id, ordinal) = roster.rent(position_of(catalog, vm), unassigned.len())?;
                record(HaEvent::RentVm {
                    container_id: id,
                    type_id: vm.type_id.clone(),
                });
                Container::vm(id, vm.clone(), ordinal)
            };
            let owner = containers.len();
            for core_index in 0..container.cores.len() {
                pool.push(CoreSlot {
                    container_id: container.id,
                    core_index,
                    capacity: container.core_capacity(),
                    busy_until: 0.0,
                });
                pool_owner.push(owner);
            }
            containers.push(container);
            continue;
        }

        match select_assignment(&unassigned, &pool) {
            Some(selection) => {
                let task = unassigned.remove(selection.task);
                let slot = &mut pool[selection.slot];
                let assignment =
                    containers[pool_owner[selection.slot]].append(slot.core_index, &task);
                debug_assert_eq!(assignment.finish, selection.finish);
                slot.busy_until = assignment.finish;
                record(HaEvent::Assign(assignment.clone()));
                assignments.push(assignment);
            }
            None => {
                let mut container_ids: Vec<usize> =
                    pool.iter().map(|slot| slot.container_id).collect();
                container_ids.dedup();
                record(HaEvent::Retire { container_ids });
                pool.clear();
                pool_owner.clear();
            }
        }
    }

    Ok(Schedule::new(assignments, containers))
}
