//! First Fit Decreasing with deadline checks.
//!
//! Tasks go longest first onto the first core, scanning PMs by total
//! capacity and then rented VMs in rental order, whose tail still finishes
//! the task by its deadline. A task that fits nowhere gets a fresh VM.

use crate::model::{Container, PmSpec, Schedule, Task, VmType, Workload};
use crate::provision::{
    position_of, screen_unschedulable, select_vm_type, validate_inputs, vm_misfits, ScheduleError,
    VmRoster,
};

/// Longest requirement first, ties by `(job_id, task_index)`.
pub fn ffd_task_order(workload: &Workload) -> Vec<Task> {
    let mut tasks: Vec<Task> = workload.tasks().cloned().collect();
    tasks.sort_by(|a, b| b.work().total_cmp(&a.work()).then(a.id().cmp(&b.id())));
    tasks
}

/// PMs by `core_count * core_capacity` descending, ties by id.
pub fn ffd_pm_order(pms: &[PmSpec]) -> Vec<PmSpec> {
    let mut sorted = pms.to_vec();
    sorted.sort_by(|a, b| {
        b.total_capacity()
            .total_cmp(&a.total_capacity())
            .then(a.id.cmp(&b.id))
    });
    sorted
}

pub fn schedule_ffd(
    workload: &Workload,
    pms: &[PmSpec],
    catalog: &[VmType],
    vm_cap: Option<usize>,
) -> Result<Schedule, ScheduleError> {
    validate_inputs(pms, catalog)?;
    let tasks = ffd_task_order(workload);
    let offenders = screen_unschedulable(&tasks, pms, catalog);
    if !offenders.is_empty() {
        return Err(ScheduleError::UnschedulableTask { tasks: offenders });
    }

    let mut containers: Vec<Container> = Vec::new();
    let mut index = CoreIndex::default();
    for pm in ffd_pm_order(pms) {
        index.add_container(containers.len(), &Container::pm(pm.clone()));
        containers.push(Container::pm(pm));
    }
    let mut roster = VmRoster::new(pms.len(), catalog.len(), vm_cap);
    let mut assignments = Vec::with_capacity(tasks.len());

    for (placed, task) in tasks.iter().enumerate() {
        let (position, core) = match index.first_fit(&containers, task) {
            Some(found) => found,
            None => {
                let single = std::slice::from_ref(task);
                let vm = select_vm_type(single, catalog).map_err(|err| match err {
                    ScheduleError::NoFeasibleVmType => ScheduleError::UnschedulableTask {
                        tasks: vm_misfits(single, catalog),
                    },
                    other => other,
                })?;
                let (id, ordinal) = roster.rent(position_of(catalog, vm), tasks.len() - placed)?;
                let container = Container::vm(id, vm.clone(), ordinal);
                index.add_container(containers.len(), &container);
                containers.push(container);
                (containers.len() - 1, 0)
            }
        };
        let assignment = containers[position].append(core, task);
        index.update(position, core, assignment.finish);
        assignments.push(assignment);
    }

    Ok(Schedule::new(assignments, containers))
}

/// Cores grouped by capacity, each group in scan order, so the first core
/// that fits is a range-minimum search per group instead of a linear scan.
#[derive(Debug, Default)]
struct CoreIndex {
    groups: Vec<CapacityGroup>,
    /// `(group, position in group)` per container and core.
    slots: Vec<Vec<(usize, usize)>>,
}

#[derive(Debug)]
struct CapacityGroup {
    capacity: f64,
    busy: MinTree,
    /// `(container position, core index)` in scan order.
    cores: Vec<(usize, usize)>,
}

impl CoreIndex {
    fn add_container(&mut self, position: usize, container: &Container) {
        debug_assert_eq!(position, self.slots.len());
        let capacity = container.core_capacity();
        let group = match self.groups.iter().position(|g| g.capacity == capacity) {
            Some(group) => group,
            None => {
                self.groups.push(CapacityGroup {
                    capacity,
                    busy: MinTree::default(),
                    cores: Vec::new(),
                });
                self.groups.len() - 1
            }
        };
        let entry = &mut self.groups[group];
        let slots = container
            .cores
            .iter()
            .enumerate()
            .map(|(core, state)| {
                entry.busy.push(state.busy_until);
                entry.cores.push((position, core));
                (group, entry.cores.len() - 1)
            })
            .collect();
        self.slots.push(slots);
    }

    fn update(&mut self, position: usize, core: usize, busy_until: f64) {
        let (group, slot) = self.slots[position][core];
        self.groups[group].busy.set(slot, busy_until);
    }

    /// Earliest `(container, core)` in scan order that finishes `task` by
    /// its deadline.
    fn first_fit(&self, containers: &[Container], task: &Task) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for group in &self.groups {
            let run = task.work() / group.capacity;
            // Loose enough to admit every core the exact test accepts.
            let limit = (task.deadline - run) + (task.deadline.abs() + run) * 1e-12;
            let mut from = 0;
            while let Some(slot) = group.busy.first_at_most(from, limit) {
                let candidate = group.cores[slot];
                if best.is_some_and(|incumbent| candidate >= incumbent) {
                    break;
                }
                if containers[candidate.0].finish_if_appended(candidate.1, task) <= task.deadline {
                    best = Some(candidate);
                    break;
                }
                from = slot + 1;
            }
        }
        best
    }
}

/// Growable min segment tree.
#[derive(Debug, Default)]
struct MinTree {
    leaves: usize,
    len: usize,
    tree: Vec<f64>,
}

impl MinTree {
    fn push(&mut self, value: f64) {
        if self.len == self.leaves {
            self.grow();
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    fn grow(&mut self) {
        let leaves = (self.leaves * 2).max(8);
        let mut tree = vec![f64::INFINITY; 2 * leaves];
        tree[leaves..leaves + self.len]
            .copy_from_slice(&self.tree[self.leaves..self.leaves + self.len]);
        for node in (1..leaves).rev() {
            tree[node] = tree[2 * node].min(tree[2 * node + 1]);
        }
        self.leaves = leaves;
        self.tree = tree;
    }

    fn set(&mut self, index: usize, value: f64) {
        let mut node = self.leaves + index;
        self.tree[node] = value;
        while node > 1 {
            node /= 2;
            self.tree[node] = self.tree[2 * node].min(self.tree[2 * node + 1]);
        }
    }

    /// Lowest index `>= from` whose value is `<= limit`.
    fn first_at_most(&self, from: usize, limit: f64) -> Option<usize> {
        if from >= self.len {
            return None;
        }
        self.descend(1, 0, self.leaves, from, limit)
    }

    fn descend(&self, node: usize, lo: usize, hi: usize, from: usize, limit: f64) -> Option<usize> {
        if hi <= from || self.tree[node] > limit {
            return None;
        }
        if hi - lo == 1 {
            return Some(lo);
        }
        let mid = (lo + hi) / 2;
        self.descend(2 * node, lo, mid, from, limit)
            .or_else(|| self.descend(2 * node + 1, mid, hi, from, limit))
    }
}
