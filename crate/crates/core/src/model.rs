//! Jobs, tasks, containers and assignments.
//!
//! Work is measured in GHz-seconds (demand normalized to a 1 GHz reference
//! core) and time in seconds. All jobs are released at time 0 and every
//! deadline is an absolute offset from 0.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("workload contains no jobs")]
    EmptyWorkload,
    #[error("invalid job {job_id}: {reason}")]
    InvalidJob { job_id: u64, reason: String },
    #[error("core capacity must be positive and finite, got {0}")]
    ZeroCapacity(f64),
    #[error("invalid PM {id}: {reason}")]
    InvalidPm { id: usize, reason: String },
    #[error("invalid VM type {type_id:?}: {reason}")]
    InvalidVmType { type_id: String, reason: String },
    #[error("invalid fleet: {0}")]
    InvalidFleet(String),
}

/// Compute demand of a task in GHz-seconds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WorkRequirement {
    pub amount: f64,
}

impl WorkRequirement {
    pub fn new(amount: f64) -> Self {
        Self { amount }
    }
}

/// `(job_id, task_index)`; orders lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskId {
    pub job_id: u64,
    pub task_index: u32,
}

impl TaskId {
    pub fn new(job_id: u64, task_index: u32) -> Self {
        Self { job_id, task_index }
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t({},{})", self.job_id, self.task_index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    /// Filled in from the owning job when a workload is built.
    #[serde(default)]
    pub job_id: u64,
    pub task_index: u32,
    pub requirement: WorkRequirement,
    /// Copy of the owning job's deadline.
    #[serde(default)]
    pub deadline: f64,
}

impl Task {
    pub fn id(&self) -> TaskId {
        TaskId::new(self.job_id, self.task_index)
    }

    pub fn work(&self) -> f64 {
        self.requirement.amount
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: u64,
    pub deadline: f64,
    pub tasks: Vec<Task>,
}

impl Job {
    /// A job whose tasks are numbered `0..requirements.len()`.
    pub fn new(id: u64, deadline: f64, requirements: &[f64]) -> Self {
        let tasks = requirements
            .iter()
            .enumerate()
            .map(|(index, &amount)| Task {
                job_id: id,
                task_index: index as u32,
                requirement: WorkRequirement::new(amount),
                deadline,
            })
            .collect();
        Self {
            id,
            deadline,
            tasks,
        }
    }
}

/// Jobs sorted by `(deadline, id)` ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WorkloadDoc")]
pub struct Workload {
    jobs: Vec<Job>,
    total_tasks: usize,
}

#[derive(Deserialize)]
struct WorkloadDoc {
    jobs: Vec<Job>,
    #[serde(default)]
    total_tasks: Option<usize>,
}

impl TryFrom<WorkloadDoc> for Workload {
    type Error = ModelError;

    fn try_from(doc: WorkloadDoc) -> Result<Self, Self::Error> {
        let workload = build_workload(doc.jobs)?;
        if let Some(declared) = doc.total_tasks {
            if declared != workload.total_tasks {
                return Err(ModelError::InvalidJob {
                    job_id: 0,
                    reason: format!(
                        "declared total_tasks {declared} but jobs hold {}",
                        workload.total_tasks
                    ),
                });
            }
        }
        Ok(workload)
    }
}

impl Workload {
    pub fn jobs(&self) -> &[Job] {
        &self.jobs
    }

    pub fn total_tasks(&self) -> usize {
        self.total_tasks
    }

    /// Tasks in workload order: by job deadline, then job id, then list order.
    pub fn tasks(&self) -> impl Iterator<Item = &Task> + '_ {
        self.jobs.iter().flat_map(|job| job.tasks.iter())
    }

    pub fn into_jobs(self) -> Vec<Job> {
        self.jobs
    }
}

/// Validates jobs, synchronizes task fields with their owning job and sorts
/// by `(deadline, id)`.
pub fn build_workload(mut jobs: Vec<Job>) -> Result<Workload, ModelError> {
    if jobs.is_empty() {
        return Err(ModelError::EmptyWorkload);
    }
    let mut job_ids = HashSet::with_capacity(jobs.len());
    for job in &mut jobs {
        let invalid = |reason: String| ModelError::InvalidJob {
            job_id: job.id,
            reason,
        };
        if !(job.deadline > 0.0 && job.deadline.is_finite()) {
            return Err(invalid(format!(
                "deadline must be positive, got {}",
                job.deadline
            )));
        }
        if job.tasks.is_empty() {
            return Err(invalid("job has no tasks".into()));
        }
        if !job_ids.insert(job.id) {
            return Err(invalid("duplicate job id".into()));
        }
        let mut indices = HashSet::with_capacity(job.tasks.len());
        for task in &job.tasks {
            let amount = task.requirement.amount;
            if !(amount > 0.0 && amount.is_finite()) {
                return Err(invalid(format!(
                    "task {} requirement must be positive, got {amount}",
                    task.task_index
                )));
            }
            if !indices.insert(task.task_index) {
                return Err(invalid(format!("duplicate task index {}", task.task_index)));
            }
        }
        for task in &mut job.tasks {
            task.job_id = job.id;
            task.deadline = job.deadline;
        }
    }
    jobs.sort_by(|a, b| a.deadline.total_cmp(&b.deadline).then(a.id.cmp(&b.id)));
    let total_tasks = jobs.iter().map(|job| job.tasks.len()).sum();
    Ok(Workload { jobs, total_tasks })
}

/// Time to run `task` alone on a core of the given capacity.
pub fn execution_time(task: &Task, capacity: f64) -> Result<f64, ModelError> {
    if !(capacity > 0.0 && capacity.is_finite()) {
        return Err(ModelError::ZeroCapacity(capacity));
    }
    Ok(task.work() / capacity)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmSpec {
    pub id: usize,
    pub core_count: usize,
    /// GHz per core.
    pub core_capacity: f64,
}

impl PmSpec {
    pub fn new(id: usize, core_count: usize, core_capacity: f64) -> Self {
        Self {
            id,
            core_count,
            core_capacity,
        }
    }

    pub fn total_capacity(&self) -> f64 {
        self.core_count as f64 * self.core_capacity
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let invalid = |reason: &str| ModelError::InvalidPm {
            id: self.id,
            reason: reason.into(),
        };
        if self.core_count == 0 {
            return Err(invalid("core_count must be at least 1"));
        }
        if !(self.core_capacity > 0.0 && self.core_capacity.is_finite()) {
            return Err(invalid("core_capacity must be positive"));
        }
        Ok(())
    }
}

pub const DEFAULT_BILLING_PERIOD: f64 = 3600.0;

fn default_billing_period() -> f64 {
    DEFAULT_BILLING_PERIOD
}

/// A rentable VM instance type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VmType {
    pub type_id: String,
    pub core_count: usize,
    pub core_capacity: f64,
    /// Currency per billing period.
    pub price: f64,
    /// Seconds.
    #[serde(default = "default_billing_period")]
    pub billing_period: f64,
}

impl VmType {
    pub fn new(
        type_id: impl Into<String>,
        core_count: usize,
        core_capacity: f64,
        price: f64,
    ) -> Self {
        Self {
            type_id: type_id.into(),
            core_count,
            core_capacity,
            price,
            billing_period: DEFAULT_BILLING_PERIOD,
        }
    }

    /// Total capacity per unit price.
    pub fn cost_performance(&self) -> f64 {
        self.core_count as f64 * self.core_capacity / self.price
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let invalid = |reason: &str| ModelError::InvalidVmType {
            type_id: self.type_id.clone(),
            reason: reason.into(),
        };
        if self.core_count == 0 {
            return Err(invalid("core_count must be at least 1"));
        }
        if !(self.core_capacity > 0.0 && self.core_capacity.is_finite()) {
            return Err(invalid("core_capacity must be positive"));
        }
        if !(self.price > 0.0 && self.price.is_finite()) {
            return Err(invalid("price must be positive"));
        }
        if !(self.billing_period > 0.0 && self.billing_period.is_finite()) {
            return Err(invalid("billing_period must be positive"));
        }
        Ok(())
    }
}

/// Checks every PM and that ids are exactly `1..=P` in list order.
pub fn validate_fleet(pms: &[PmSpec]) -> Result<(), ModelError> {
    for (position, pm) in pms.iter().enumerate() {
        pm.validate()?;
        if pm.id != position + 1 {
            return Err(ModelError::InvalidFleet(format!(
                "PM at position {position} has id {}, expected {}",
                pm.id,
                position + 1
            )));
        }
    }
    Ok(())
}

pub fn validate_catalog(catalog: &[VmType]) -> Result<(), ModelError> {
    let mut seen = HashSet::new();
    for vm in catalog {
        vm.validate()?;
        if !seen.insert(vm.type_id.as_str()) {
            return Err(ModelError::InvalidVmType {
                type_id: vm.type_id.clone(),
                reason: "duplicate type_id".into(),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContainerKind {
    Pm,
    Vm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VmInstance {
    pub vm_type: VmType,
    /// Per-type rental ordinal, starting at 0.
    pub instance: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "spec", rename_all = "lowercase")]
pub enum ContainerSpec {
    Pm(PmSpec),
    Vm(VmInstance),
}

/// Runtime state of one core.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Core {
    /// Assigned tasks in execution order.
    pub tasks: Vec<TaskId>,
    /// Sum of execution times of the assigned tasks.
    pub busy_until: f64,
    /// Sum of requirements of the assigned tasks, GHz-seconds.
    pub work: f64,
}

/// A PM or a rented VM instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Container {
    pub id: usize,
    #[serde(flatten)]
    pub spec: ContainerSpec,
    pub cores: Vec<Core>,
}

impl Container {
    pub fn pm(spec: PmSpec) -> Self {
        let cores = vec![Core::default(); spec.core_count];
        Self {
            id: spec.id,
            spec: ContainerSpec::Pm(spec),
            cores,
        }
    }

    pub fn vm(id: usize, vm_type: VmType, instance: usize) -> Self {
        let cores = vec![Core::default(); vm_type.core_count];
        Self {
            id,
            spec: ContainerSpec::Vm(VmInstance { vm_type, instance }),
            cores,
        }
    }

    pub fn kind(&self) -> ContainerKind {
        match self.spec {
            ContainerSpec::Pm(_) => ContainerKind::Pm,
            ContainerSpec::Vm(_) => ContainerKind::Vm,
        }
    }

    pub fn core_capacity(&self) -> f64 {
        match &self.spec {
            ContainerSpec::Pm(pm) => pm.core_capacity,
            ContainerSpec::Vm(vm) => vm.vm_type.core_capacity,
        }
    }

    pub fn vm_type(&self) -> Option<&VmType> {
        match &self.spec {
            ContainerSpec::Vm(vm) => Some(&vm.vm_type),
            ContainerSpec::Pm(_) => None,
        }
    }

    pub fn task_count(&self) -> usize {
        self.cores.iter().map(|core| core.tasks.len()).sum()
    }

    pub fn is_used(&self) -> bool {
        self.cores.iter().any(|core| !core.tasks.is_empty())
    }

    /// Time the container is in use: the latest core finish.
    pub fn busy_time(&self) -> f64 {
        self.cores
            .iter()
            .map(|core| core.busy_until)
            .fold(0.0, f64::max)
    }

    /// Finish time `task` would have if appended to `core_index`.
    pub fn finish_if_appended(&self, core_index: usize, task: &Task) -> f64 {
        self.cores[core_index].busy_until + task.work() / self.core_capacity()
    }

    /// Appends `task` to the end of a core's sequence.
    pub fn append(&mut self, core_index: usize, task: &Task) -> Assignment {
        let capacity = self.core_capacity();
        let core = &mut self.cores[core_index];
        let start = core.busy_until;
        let finish = start + task.work() / capacity;
        core.tasks.push(task.id());
        core.busy_until = finish;
        core.work += task.work();
        Assignment {
            task: task.id(),
            container_id: self.id,
            core_index,
            start,
            finish,
        }
    }
}

/// One placed task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub task: TaskId,
    pub container_id: usize,
    pub core_index: usize,
    pub start: f64,
    pub finish: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub assignments: Vec<Assignment>,
    /// Containers ordered by id.
    pub containers: Vec<Container>,
    pub rented_vm_count: usize,
}

impl Schedule {
    pub fn new(assignments: Vec<Assignment>, mut containers: Vec<Container>) -> Self {
        containers.sort_by_key(|container| container.id);
        let rented_vm_count = containers
            .iter()
            .filter(|container| container.kind() == ContainerKind::Vm && container.is_used())
            .count();
        Self {
            assignments,
            containers,
            rented_vm_count,
        }
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new())
    }

    pub fn container(&self, id: usize) -> Option<&Container> {
        self.containers
            .binary_search_by_key(&id, |container| container.id)
            .ok()
            .map(|position| &self.containers[position])
    }
}

/// Weight of local utilization in the objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveParams {
    pub epsilon: f64,
    pub pm_count: usize,
}

impl ObjectiveParams {
    pub fn new(epsilon: f64, pm_count: usize) -> Self {
        Self { epsilon, pm_count }
    }

    /// Largest admissible epsilon (exclusive) for the given catalog.
    pub fn epsilon_bound(catalog: &[VmType], pm_count: usize) -> Option<f64> {
        let min_price = catalog.iter().map(|vm| vm.price).reduce(f64::min)?;
        (pm_count > 0).then(|| min_price / pm_count as f64)
    }

    /// `0 < epsilon < min price / P` for every type in `catalog`.
    pub fn satisfies_bound(&self, catalog: &[VmType]) -> bool {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) || self.pm_count == 0 {
            return false;
        }
        catalog
            .iter()
            .all(|vm| self.epsilon < vm.price / self.pm_count as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_by_deadline_then_id() {
        let jobs = vec![
            Job::new(1, 5.0, &[1.0]),
            Job::new(2, 2.0, &[1.0]),
            Job::new(3, 2.0, &[1.0]),
        ];
        let workload = build_workload(jobs).unwrap();
        let order: Vec<_> = workload.jobs().iter().map(|j| (j.id, j.deadline)).collect();
        assert_eq!(order, vec![(2, 2.0), (3, 2.0), (1, 5.0)]);
    }

    #[test]
    fn single_task_workload() {
        let workload = build_workload(vec![Job::new(7, 3.0, &[2.0])]).unwrap();
        assert_eq!(workload.total_tasks(), 1);
    }

    #[test]
    fn rejects_bad_jobs() {
        assert_eq!(build_workload(vec![]), Err(ModelError::EmptyWorkload));
        let err =
            build_workload(vec![Job::new(1, 1.0, &[1.0]), Job::new(9, 0.0, &[1.0])]).unwrap_err();
        assert!(matches!(err, ModelError::InvalidJob { job_id: 9, .. }));
        let err = build_workload(vec![Job::new(4, 1.0, &[1.0, -2.0])]).unwrap_err();
        assert!(matches!(err, ModelError::InvalidJob { job_id: 4, .. }));
        let err = build_workload(vec![Job::new(4, 1.0, &[])]).unwrap_err();
        assert!(matches!(err, ModelError::InvalidJob { job_id: 4, .. }));
        let err =
            build_workload(vec![Job::new(4, 1.0, &[1.0]), Job::new(4, 2.0, &[1.0])]).unwrap_err();
        assert!(matches!(err, ModelError::InvalidJob { job_id: 4, .. }));
    }

    #[test]
    fn syncs_task_fields() {
        let mut job = Job::new(3, 8.0, &[1.0, 2.0]);
        job.tasks[1].deadline = 99.0;
        job.tasks[1].job_id = 42;
        let workload = build_workload(vec![job]).unwrap();
        assert!(workload.tasks().all(|t| t.deadline == 8.0 && t.job_id == 3));
    }

    #[test]
    fn execution_times() {
        let task = |amount| Job::new(1, 10.0, &[amount]).tasks.remove(0);
        assert_eq!(execution_time(&task(10.0), 2.0), Ok(5.0));
        let t = execution_time(&task(4.0), 2.7).unwrap();
        assert!((t - 1.481_481_481_481_481_5).abs() < 1e-15);
        assert_eq!(t, 4.0 / 2.7);
        assert_eq!(execution_time(&task(7.0), 1.0), Ok(7.0));
        assert_eq!(
            execution_time(&task(7.0), 0.0),
            Err(ModelError::ZeroCapacity(0.0))
        );
    }

    #[test]
    fn fleet_ids_must_be_sequential() {
        assert!(validate_fleet(&[PmSpec::new(1, 2, 2.0), PmSpec::new(2, 1, 3.0)]).is_ok());
        assert!(validate_fleet(&[PmSpec::new(2, 2, 2.0)]).is_err());
        assert!(validate_fleet(&[PmSpec::new(1, 0, 2.0)]).is_err());
    }

    #[test]
    fn container_json_shape() {
        let mut vm = Container::vm(3, VmType::new("c3.large", 2, 2.7, 0.105), 0);
        let task = Job::new(1, 10.0, &[2.7]).tasks.remove(0);
        vm.append(1, &task);
        let value = serde_json::to_value(&vm).unwrap();
        assert_eq!(value["kind"], "vm");
        assert_eq!(value["spec"]["vm_type"]["type_id"], "c3.large");
        assert_eq!(value["cores"][1]["busy_until"], 1.0);
        let back: Container = serde_json::from_value(value).unwrap();
        assert_eq!(back, vm);
    }

    #[test]
    fn workload_document_is_validated() {
        let text = r#"{"jobs":[{"id":1,"deadline":-1.0,"tasks":[]}]}"#;
        assert!(serde_json::from_str::<Workload>(text).is_err());
        let text = r#"{"jobs":[
            {"id":1,"deadline":5.0,"tasks":[{"job_id":1,"task_index":0,"requirement":2.0,"deadline":5.0}]},
            {"id":2,"deadline":1.0,"tasks":[{"job_id":2,"task_index":0,"requirement":1.0,"deadline":1.0}]}
        ]}"#;
        let workload: Workload = serde_json::from_str(text).unwrap();
        assert_eq!(workload.jobs()[0].id, 2);
    }

    #[test]
    fn epsilon_bound() {
        let catalog = [
            VmType::new("a", 2, 2.7, 0.105),
            VmType::new("b", 1, 2.0, 0.21),
        ];
        let bound = ObjectiveParams::epsilon_bound(&catalog, 15).unwrap();
        assert_eq!(bound, 0.105 / 15.0);
        assert!(ObjectiveParams::new(0.0035, 15).satisfies_bound(&catalog));
        assert!(!ObjectiveParams::new(0.007, 15).satisfies_bound(&catalog));
        assert!(!ObjectiveParams::new(0.0, 15).satisfies_bound(&catalog));
    }
}
