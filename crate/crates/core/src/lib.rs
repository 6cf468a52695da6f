//! Scheduling deadline-constrained bag-of-tasks jobs on a hybrid cloud.
//!
//! Local physical machines (PMs) are free but finite; public VMs can be
//! rented on demand and are billed per started billing period. The crate
//! provides:
//!
//!  * [`model`]: jobs, tasks, containers and schedules,
//!  * [`metrics`]: deadline feasibility, rent cost, utilization, makespan
//!    and the cost/utilization objective,
//!  * [`ha`]: the minimum-slack greedy heuristic,
//!  * [`ffd`]: a First Fit Decreasing baseline with deadline checks,
//!  * [`exact`]: an exhaustive optimum for tiny instances,
//!  * [`trace`]: SWF trace ingestion and workload shaping,
//!  * [`config`] and [`synth`]: run configuration and random instances.
//!
//! ```
//! use hybrid_sched::{build_workload, schedule_ha, Job, PmSpec, VmType};
//!
//! let workload = build_workload(vec![Job::new(1, 2.0, &[4.0, 2.0])]).unwrap();
//! let pms = [PmSpec::new(1, 1, 2.0)];
//! let catalog = [VmType::new("c3.large", 2, 2.7, 0.105)];
//! let schedule = schedule_ha(&workload, &pms, &catalog, None).unwrap();
//! assert_eq!(schedule.rented_vm_count, 1);
//! ```

pub mod config;
pub mod exact;
pub mod ffd;
pub mod ha;
pub mod metrics;
pub mod model;
pub mod provision;
pub mod synth;
pub mod trace;

pub use config::{default_catalog, default_fleet, HybridConfig};
pub use exact::{solve_exact, solve_exact_with_limits, ExactError, ExactLimits, ExactSolution};
pub use ffd::schedule_ffd;
pub use ha::{schedule_ha, select_assignment, CoreSlot};
pub use metrics::{
    check_deadlines, default_epsilon, evaluate, makespan, objective_value, overall_utilization,
    pm_utilization, rent_cost, total_rent_cost, FeasibilityReport, MetricsError, MetricsReport,
    Violation,
};
pub use model::{
    build_workload, execution_time, Assignment, Container, ContainerKind, Core, Job, ModelError,
    ObjectiveParams, PmSpec, Schedule, Task, TaskId, VmType, WorkRequirement, Workload,
};
pub use provision::{select_pm, select_vm_type, ScheduleError};
pub use trace::{
    parse_swf, scale_fleet, to_workload, truncate_tasks, FleetConfig, RawTraceJob, SwfTrace,
    TaskMapping, TraceError,
};

/// Which heuristic to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Ha,
    Ffd,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ha => "ha",
            Algorithm::Ffd => "ffd",
        }
    }

    pub fn run(
        self,
        workload: &Workload,
        pms: &[PmSpec],
        catalog: &[VmType],
        vm_cap: Option<usize>,
    ) -> Result<Schedule, ScheduleError> {
        match self {
            Algorithm::Ha => schedule_ha(workload, pms, catalog, vm_cap),
            Algorithm::Ffd => schedule_ffd(workload, pms, catalog, vm_cap),
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        match text.to_ascii_lowercase().as_str() {
            "ha" => Ok(Algorithm::Ha),
            "ffd" => Ok(Algorithm::Ffd),
            other => Err(format!("unknown algorithm {other:?}, expected ha or ffd")),
        }
    }
}
